#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsp/equioscillation.hpp"
#include "gsp/gspline.hpp"
#include "gsp/weights.hpp"

namespace gsp {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateKnotsError : public SolverError {
 public:
  DegenerateKnotsError(std::string what, std::vector<double> knots)
      : SolverError(std::move(what)), knots(std::move(knots)) {}
  std::vector<double> knots;
};

/// Requested deviation is not attainable for any interval length.
class RangeError : public std::runtime_error {
 public:
  RangeError(std::string what, double achieved_sup, double a_reached)
      : std::runtime_error(std::move(what)),
        achieved_sup(achieved_sup),
        a_reached(a_reached) {}
  double achieved_sup;
  double a_reached;
};

struct ExtremalConfig {
  double tol = 1e-10;            // residual tolerance (scaled coefficients)
  double certificate_tol = 1e-6; // relative levelling tolerance of the check
  int max_outer = 80;
  double fd_step_rel = 1e-5;     // finite-difference step, relative to a
  double min_gap_rel = 1e-8;     // knot separation floor, relative to a
  bool strict = false;           // re-solve from an independent init
  std::vector<double> initial_knots;      // warm start (size n) or empty
  std::vector<double> warm_reference;     // Remez reference warm start
  RemezOptions remez;
};

struct ExtremalResult {
  PerfectGSpline spline;
  double deviation = 0.0;
  CertificateCheck certificate;
  int outer_iterations = 0;
  int residual_evaluations = 0;
  std::vector<double> alternation_points;  // for warm-starting later solves
};

/// The perfect g-spline with n knots least deviating from zero on [0, a] in
/// the f-weighted uniform norm, normalized so G(a)/f(a) > 0.
ExtremalResult solve_extremal(const Weight& f, const Weight& g, int r, int n,
                              double a, const ExtremalConfig& config = {});

/// phi_{r,n}(a): the minimal deviation itself.
double phi(const Weight& f, const Weight& g, int r, int n, double a,
           const ExtremalConfig& config = {});

struct PhiPoint {
  double a = 0.0;
  double value = 0.0;
};

/// Samples of a |-> phi_{r,n}(a) on a log-spaced grid of [a_min, a_max].
std::vector<PhiPoint> phi_curve(const Weight& f, const Weight& g, int r, int n,
                                double a_min, double a_max, int samples,
                                const ExtremalConfig& config = {});

struct AForDeltaResult {
  double a = 0.0;
  ExtremalResult solve;
};

/// Solves phi_{r,n}(a) = delta for a.  Throws RangeError when the deviation
/// saturates below delta (the finite-modulus regime).
AForDeltaResult solve_a_for_delta(const Weight& f, const Weight& g, int r,
                                  int n, double delta, double a_hint = 1.0,
                                  double max_a = 1e9, double rel_tol = 1e-9,
                                  const ExtremalConfig& config = {});

}  // namespace gsp
