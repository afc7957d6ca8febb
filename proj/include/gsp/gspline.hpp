#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gsp/calculus.hpp"
#include "gsp/weights.hpp"

namespace gsp {

/// Witness of the alternation conditions: n + r + 1 points where |G|/f
/// attains the common deviation with alternating signs, last point = a.
struct EquioscillationCertificate {
  std::vector<double> points;
  std::vector<int> signs;
  double deviation = 0.0;
  double gap = 0.0;  // max | |G(t_i)|/f(t_i) - deviation |
};

/// C^{r-1} function with G^{(r)}/g = epsilon * (-1)^i between knots.
/// Stored as (knots, epsilon, correction polynomial); evaluated through a
/// shared moment table of g, so derivatives are O(1) after setup.
class PerfectGSpline {
 public:
  PerfectGSpline(int r, double a, std::vector<double> knots, int epsilon,
                 std::vector<double> poly, Weight g,
                 std::shared_ptr<const MomentTable> table = nullptr,
                 double table_tol = 1e-12);

  /// G^{(d)}(t), 0 <= d <= r; at a knot the order-r derivative is the
  /// right limit.
  double eval(int d, double t) const;
  double operator()(double t) const { return eval(0, t); }

  int order() const { return r_; }
  double interval_end() const { return a_; }
  const std::vector<double>& knots() const { return knots_; }
  int epsilon() const { return epsilon_; }
  const std::vector<double>& poly() const { return poly_; }
  const Weight& g() const { return g_; }
  std::shared_ptr<const MomentTable> table() const { return table_; }

  /// Flips the global sign of G.
  void negate();

  std::string to_json() const;
  static PerfectGSpline from_json(const std::string& text);

 private:
  double kernel(int d, double t) const;

  int r_;
  double a_;
  std::vector<double> knots_;
  int epsilon_;
  std::vector<double> poly_;  // c_0..c_{r-1}, G = eps*K - poly
  Weight g_;
  std::shared_ptr<const MomentTable> table_;
  std::vector<std::vector<double>> prefix_;  // signed moment sums at knots
};

/// Sign changes of G^{(d)} on a dense grid with bisection refinement.
int count_sign_changes(const PerfectGSpline& s, int d, int grid = 4096);

struct CertificateCheck {
  bool ok = false;
  EquioscillationCertificate certificate;
  std::string failure;  // violated clause when !ok
};

/// Locates local extrema of G/f and verifies the n+r+1 alternation clauses
/// within tol (relative to the deviation).
CertificateCheck check_certificate(const PerfectGSpline& s, const Weight& f,
                                   double tol = 1e-6);

std::string certificate_to_json(const EquioscillationCertificate& c);

}  // namespace gsp
