#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loglap {

// Gauss-Legendre nodes and weights on [-1, 1], computed once per order by
// Newton iteration on the Legendre recurrence and cached.
struct GaussRule {
  std::vector<double> node;
  std::vector<double> weight;
};

const GaussRule& gauss_rule(int order);

double gauss_panel(const std::function<double(double)>& f, double a, double b,
                   int order);

struct QuadResult {
  double value = 0.0;
  double est_error = 0.0;
  int panels = 0;
};

// Panel integration over the sorted breakpoint list with per-panel embedded
// error control (order-16 against order-8); panels exceeding their share of
// the budget are bisected, up to max_depth rounds.
QuadResult adaptive_integrate(const std::function<double(double)>& f,
                              std::vector<double> breakpoints, double tol,
                              int max_depth = 24);

// Breakpoints {hi*ratio^k} down to lo_floor, ascending, endpoints included.
// Used to resolve integrable endpoint singularities at 0.
std::vector<double> geometric_breakpoints(double lo_floor, double hi,
                                          double ratio = 0.5);

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

}  // namespace loglap
