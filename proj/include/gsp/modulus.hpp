#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsp/calculus.hpp"
#include "gsp/extremal.hpp"
#include "gsp/gspline.hpp"
#include "gsp/weights.hpp"

namespace gsp {

struct ModulusQuery {
  int r = 2;
  int k = 1;  // 1 <= k <= r-1
  Weight f;
  Weight g;
  double delta = 1.0;  // n-sweep target deviation
  int n = 0;           // fixed knot count for the a-sweep
  double tol = 1e-3;   // relative plateau tolerance (3-step rule)
  int max_n = 16;
  double max_a = 1e6;
  double growth = 2.0;  // a-sweep grid ratio (doubling by default)
  ExtremalConfig solver;
};

struct TracePoint {
  double param = 0.0;  // n (as a double) or a
  double value = 0.0;  // |G^{(k)}(0)| exactly as evaluated
  double phi = 0.0;    // deviation at this sweep point
};

struct ModulusResult {
  double omega = 0.0;
  std::vector<TracePoint> trace;
  bool converged = false;
  double phi_infinity = 0.0;       // a-sweep only: plateau of phi(a)
  double richardson = 0.0;         // diagnostic extrapolation, never primary
  bool has_richardson = false;
  std::string diagnostics;
  std::optional<PerfectGSpline> spline;  // final sweep solve

  // echo of the query for serialization
  int r = 0, k = 0, n = -1;
  double delta = 0.0;
  std::string f_kind, g_kind, sweep;

  std::string to_json() const;
};

class NoConvergenceError : public std::runtime_error {
 public:
  NoConvergenceError(std::string what, std::vector<TracePoint> trace)
      : std::runtime_error(std::move(what)), trace(std::move(trace)) {}
  std::vector<TracePoint> trace;
};

/// omega(D^k, delta) when phi_{r,0,f}(inf) = inf: n-sweep of
/// |G^{(k)}_{r,n,f,a_n}(0)| with a_n solving phi = delta.
ModulusResult omega_infinite_case(const ModulusQuery& q);

/// omega(D^k, phi_{r,n,f}(inf)) when the deviation saturates: a-doubling
/// sweep with fixed n, recording phi(a) and |G^{(k)}(0)|.
ModulusResult omega_finite_case(const ModulusQuery& q);

enum class FloorKind { Positive, Zero, Inconclusive };

struct FloorReport {
  FloorKind kind = FloorKind::Inconclusive;
  double c = 0.0;      // sampled lim inf of f/|P_r| when finite
  double bound = 0.0;  // 1/(2c) lower bound on the deviation floor
  double reliable_end = 0.0;
  std::string notion;  // which sampled-limit notion was evaluated
  std::string diagnostics;

  std::string to_json() const;
};

/// Dichotomy for lim_n phi_{r,n,f}(inf): positive iff f/|P_r| has a finite
/// lim inf at infinity.
FloorReport asymptotic_floor(const Weight& f, const Weight& g, int r);

struct MordellReport {
  double n0 = 0.0;  // sup |x|/f
  double n1 = 0.0;  // sup |x'|/sqrt(fg)
  double n2 = 0.0;  // sup |x''|/g
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs, expected >= -tol

  std::string to_json() const;
};

/// Weighted Landau inequality margin for a twice differentiable function on
/// [0, a]: 2 sqrt(N0 N2) - N1.
MordellReport verify_mordell(const std::function<double(double)>& x,
                             const std::function<double(double)>& dx,
                             const std::function<double(double)>& ddx,
                             double a, const Weight& f, const Weight& g);
MordellReport verify_mordell(const PerfectGSpline& x, const Weight& f,
                             const Weight& g);

/// T_r^{(k)}(1) / [T_r^{(r)}(1)]^{k/r} in closed form; sharp for r in {2,3}.
double matorin_constant(int k, int r);
bool matorin_sharp(int r);

}  // namespace gsp
