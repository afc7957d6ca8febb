#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsp/weights.hpp"

namespace gsp {

struct WeightedApproxResult {
  std::vector<double> poly;  // monomial c_0..c_m
  std::vector<double> cheb;  // Chebyshev-on-[0,a] coefficients
  double deviation = 0.0;
  std::vector<double> alternation_points;  // m + 2 points
  int iterations = 0;
  std::vector<double> residual_history;
};

class RemezConvergenceError : public std::runtime_error {
 public:
  RemezConvergenceError(std::string what, std::vector<double> history)
      : std::runtime_error(std::move(what)),
        residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

struct RemezOptions {
  double tol = 1e-11;  // relative levelling tolerance
  int max_iterations = 200;
  int grid = 0;  // 0 -> automatic
  std::vector<double> warm_reference;
};

/// Best uniform approximation of h by a polynomial of degree <= m in the
/// f-weighted norm on [0, a], by multi-point Remez exchange on (h - Q)/f.
WeightedApproxResult best_weighted_poly(
    const std::function<double(double)>& h, const Weight& f, int degree,
    double a, const RemezOptions& options = {});

struct ExtremaList {
  std::vector<double> points;
  bool shortage = false;  // fewer extrema than the caller hinted
};

/// Local extrema of residual/f on [0, a]; endpoints are always candidates.
ExtremaList weighted_extrema(const std::function<double(double)>& residual,
                             const Weight& f, double a, int hint);

/// Values of the Chebyshev polynomials on [0, a] at t.
void cheb_values(double t, double a, std::vector<double>& out);

/// Converts Chebyshev-on-[0,a] coefficients to monomial coefficients.
std::vector<double> cheb_to_monomial(const std::vector<double>& cheb,
                                     double a);

}  // namespace gsp
