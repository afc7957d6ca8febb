#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace gsp {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  std::size_t evals = 0;
};

/// Thrown when the requested tolerance cannot be reached within the node
/// budget; carries the error actually achieved.
class QuadratureBudgetError : public std::runtime_error {
 public:
  QuadratureBudgetError(double achieved, double requested)
      : std::runtime_error("quadrature budget exhausted: achieved error " +
                           std::to_string(achieved) + ", requested " +
                           std::to_string(requested)),
        achieved_error(achieved),
        requested_tol(requested) {}
  double achieved_error;
  double requested_tol;
};

// Single Gauss-Kronrod 7-15 panel on [a,b]; error = |K15 - G7|.
QuadResult gk15(const std::function<double(double)>& fn, double a, double b);

// One panel for the moment family int_a^b s^j w(s) ds, j = 0..count-1,
// sharing the 15 weight evaluations.  values/errors must hold count entries.
void gk15_moments(const std::function<double(double)>& w, double a, double b,
                  double* values, double* errors, int count);

// Globally adaptive Gauss-Kronrod on [a,b] with absolute tolerance.
QuadResult integrate(const std::function<double(double)>& fn, double a,
                     double b, double abs_tol,
                     std::size_t max_evals = 1'000'000);

enum class TailStatus { Converged, Divergent, Inconclusive };

struct ImproperResult {
  double value = 0.0;
  double error = 0.0;
  double horizon = 0.0;  // last horizon integrated to
  TailStatus status = TailStatus::Inconclusive;
  bool heuristic = false;  // tail accepted without an analytic certificate
};

/// Integral of fn over [0, inf) by doubling horizons.
///
/// With `certified_decay` the caller asserts the integrand has an integrable
/// tail and one sub-tolerance increment suffices.  Without it, three
/// consecutive sub-tolerance increments with a decaying integrand are
/// accepted and flagged heuristic; a geometric increment pattern is
/// extrapolated.  Non-shrinking increments are reported Divergent.
ImproperResult integrate_to_infinity(const std::function<double(double)>& fn,
                                     double abs_tol, bool certified_decay,
                                     double initial_horizon = 1.0,
                                     double max_horizon = 1e9,
                                     std::size_t max_evals = 4'000'000);

}  // namespace gsp
