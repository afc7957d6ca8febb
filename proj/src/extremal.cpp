#include "gsp/extremal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gsp {

namespace {

std::vector<double> mass_quantile_knots(const MomentTable& table, int n,
                                        double a) {
  const double total = table.moment(0, a);
  std::vector<double> knots(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double target = total * i / (n + 1);
    double lo = 0.0, hi = a;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (table.moment(0, mid) < target ? lo : hi) = mid;
    }
    knots[static_cast<std::size_t>(i - 1)] = 0.5 * (lo + hi);
  }
  return knots;
}

bool valid_knots(const Eigen::VectorXd& x, double a, double min_gap) {
  double prev = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) - prev >= min_gap)) return false;
    prev = x(i);
  }
  return a - prev >= min_gap;
}

// For fixed knots the deviation is minimized by approximating the kernel by
// a polynomial of degree n+r-1; the knots are extremal exactly when the best
// such polynomial in fact has degree <= r-1.  The scaled high Chebyshev
// coefficients are the residual driven to zero by the outer iteration.
class Residual {
 public:
  Residual(const Weight& f, const Weight& g, int r, int n, double a,
           std::shared_ptr<const MomentTable> table,
           const ExtremalConfig& config)
      : f_(f), g_(g), r_(r), n_(n), a_(a), table_(std::move(table)) {
    opts_ = config.remez;
    opts_.warm_reference = config.warm_reference;
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) {
    std::vector<double> knots(x.data(), x.data() + x.size());
    PerfectGSpline kernel(r_, a_, std::move(knots), 1,
                          std::vector<double>(static_cast<std::size_t>(r_), 0.0),
                          g_, table_);
    auto h = [&](double t) { return kernel.eval(0, t); };
    try {
      last_ = best_weighted_poly(h, f_, n_ + r_ - 1, a_, opts_);
    } catch (const RemezConvergenceError& e) {
      std::string msg = std::string("inner levelling failed: ") + e.what() +
                        " (knots";
      for (Eigen::Index i = 0; i < x.size(); ++i)
        msg += " " + std::to_string(x(i));
      throw SolverError(msg + ")");
    }
    opts_.warm_reference = last_.alternation_points;
    ++evals_;
    double scale = last_.deviation;
    for (double c : last_.cheb) scale = std::max(scale, std::abs(c));
    Eigen::VectorXd F(n_);
    double worst = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double c = last_.cheb[static_cast<std::size_t>(r_ + i)];
      F(i) = c / scale;
      worst = std::max(worst, std::abs(c));
    }
    // convergence is judged against the deviation, which is what the dropped
    // coefficients perturb in the assembled spline
    crit_ = last_.deviation > 0.0 ? worst / last_.deviation : worst;
    return F;
  }

  const WeightedApproxResult& last() const { return last_; }
  int evals() const { return evals_; }
  double crit() const { return crit_; }

 private:
  const Weight& f_;
  const Weight& g_;
  int r_, n_;
  double a_;
  std::shared_ptr<const MomentTable> table_;
  RemezOptions opts_;
  WeightedApproxResult last_;
  int evals_ = 0;
  double crit_ = 0.0;
};

ExtremalResult assemble(const Weight& f, const Weight& g, int r, double a,
                        std::vector<double> knots,
                        std::shared_ptr<const MomentTable> table,
                        const std::vector<double>& warm_reference,
                        const ExtremalConfig& config, int outer, int evals) {
  // Re-level at degree r-1 with the final knots so the subtracted polynomial
  // is exactly admissible (degree < r); this removes the truncation error a
  // degree-(n+r-1) coefficient cut would leave in the certificate.
  PerfectGSpline kernel(r, a, knots, 1,
                        std::vector<double>(static_cast<std::size_t>(r), 0.0),
                        g, table);
  auto h = [&](double t) { return kernel.eval(0, t); };
  RemezOptions opts = config.remez;
  // seed with r+1 consecutive alternation points: near the solution the
  // residual has n+r+1 near-equal extrema, and a cold exchange can cycle
  // between equally good references
  if (static_cast<int>(warm_reference.size()) >= r + 1) {
    opts.warm_reference.assign(warm_reference.begin(),
                               warm_reference.begin() + r + 1);
    // the knots carry an error of order config.tol relative to the
    // deviation, so the residual cannot level beyond that
    opts.tol = std::max(opts.tol, 10.0 * config.tol);
  }
  WeightedApproxResult polish;
  try {
    polish = best_weighted_poly(h, f, r - 1, a, opts);
  } catch (const RemezConvergenceError& e) {
    throw SolverError(std::string("final levelling failed: ") + e.what());
  }
  std::vector<double> mono = cheb_to_monomial(polish.cheb, a);
  std::vector<double> poly(static_cast<std::size_t>(r), 0.0);
  for (int i = 0; i < r && i < static_cast<int>(mono.size()); ++i)
    poly[static_cast<std::size_t>(i)] = mono[static_cast<std::size_t>(i)];
  PerfectGSpline spline(r, a, std::move(knots), 1, std::move(poly), g, table);
  if (spline.eval(0, a) / f(a) < 0.0) spline.negate();
  ExtremalResult out{std::move(spline)};
  out.deviation = polish.deviation;
  out.outer_iterations = outer;
  out.residual_evaluations = evals + 1;
  out.alternation_points =
      warm_reference.empty() ? polish.alternation_points : warm_reference;
  out.certificate = check_certificate(out.spline, f, config.certificate_tol);
  return out;
}

ExtremalResult solve_impl(const Weight& f, const Weight& g, int r, int n,
                          double a, const ExtremalConfig& config) {
  auto table = std::make_shared<MomentTable>(g, r - 1, a, 1e-12);

  if (n == 0) {
    ExtremalConfig cfg = config;
    if (static_cast<int>(config.warm_reference.size()) == r + 1)
      cfg.remez.warm_reference = config.warm_reference;
    return assemble(f, g, r, a, {}, table, {}, cfg, 0, 0);
  }

  const double min_gap = config.min_gap_rel * a;
  // acceptance level when the iteration stalls at the inner noise floor
  const double stall_tol = std::max(config.tol, 1e-6);
  Eigen::VectorXd x(n);
  {
    std::vector<double> init = config.initial_knots;
    if (static_cast<int>(init.size()) != n)
      init = mass_quantile_knots(*table, n, a);
    for (int i = 0; i < n; ++i) x(i) = init[static_cast<std::size_t>(i)];
    if (!valid_knots(x, a, min_gap))
      for (int i = 0; i < n; ++i) x(i) = a * (i + 1) / (n + 1);
  }

  Residual residual(f, g, r, n, a, table, config);
  Eigen::VectorXd F = residual(x);
  double crit = residual.crit();
  Eigen::MatrixXd J(n, n);
  bool have_jacobian = false;
  bool jacobian_fresh = false;
  int steps_since_fd = 0;
  const double fd = config.fd_step_rel * a;

  int outer = 0;
  for (; outer < config.max_outer; ++outer) {
    if (crit <= config.tol) break;

    if (!have_jacobian || steps_since_fd >= 8) {
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x;
        double step = fd;
        xp(j) += step;
        if (!valid_knots(xp, a, min_gap)) {
          step = -fd;
          xp(j) = x(j) + step;
        }
        J.col(j) = (residual(xp) - F) / step;
      }
      have_jacobian = true;
      jacobian_fresh = true;
      steps_since_fd = 0;
    }

    const Eigen::VectorXd d = J.colPivHouseholderQr().solve(-F);
    const double f0 = F.norm();
    double lambda = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new, F_new;
    double crit_new = crit;
    int halvings = 0;
    for (; halvings < 20; ++halvings, lambda *= 0.5) {
      x_new = x + lambda * d;
      if (!valid_knots(x_new, a, min_gap)) continue;
      F_new = residual(x_new);
      crit_new = residual.crit();
      if (F_new.norm() < f0) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (jacobian_fresh) {
        // stalled against the inner solver's noise floor: accept if the
        // residual is already small (the certificate still has the final say)
        if (crit <= stall_tol) break;
        double gap = x(0);
        for (int i = 1; i < n; ++i) gap = std::min(gap, x(i) - x(i - 1));
        gap = std::min(gap, a - x(n - 1));
        std::vector<double> ks(x.data(), x.data() + n);
        if (gap < 10.0 * min_gap)
          throw DegenerateKnotsError(
              "knots collapse during the outer iteration", std::move(ks));
        throw SolverError(
            "outer iteration stalled (no descent direction, residual " +
            std::to_string(crit) + ")");
      }
      have_jacobian = false;  // retry with a fresh Jacobian
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = F_new - F;
    J += (y - J * s) * s.transpose() / s.squaredNorm();
    jacobian_fresh = false;
    ++steps_since_fd;
    if (halvings >= 3) have_jacobian = false;
    x = std::move(x_new);
    F = std::move(F_new);
    crit = crit_new;
  }

  if (crit > stall_tol)
    throw SolverError("outer iteration did not converge within " +
                      std::to_string(config.max_outer) + " steps (residual " +
                      std::to_string(crit) + ")");

  std::vector<double> knots(x.data(), x.data() + n);
  return assemble(f, g, r, a, std::move(knots), table,
                  residual.last().alternation_points, config, outer,
                  residual.evals());
}

}  // namespace

ExtremalResult solve_extremal(const Weight& f, const Weight& g, int r, int n,
                              double a, const ExtremalConfig& config) {
  if (r < 1) throw std::invalid_argument("solve_extremal: r >= 1");
  if (n < 0) throw std::invalid_argument("solve_extremal: n >= 0");
  if (!(a > 0.0)) throw std::invalid_argument("solve_extremal: a > 0");
  ExtremalResult out = solve_impl(f, g, r, n, a, config);
  if (config.strict && n > 0) {
    ExtremalConfig probe = config;
    probe.strict = false;
    probe.initial_knots.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      probe.initial_knots[static_cast<std::size_t>(i)] = a * (i + 1) / (n + 1);
    probe.warm_reference.clear();
    ExtremalResult again = solve_impl(f, g, r, n, a, probe);
    double drift = 0.0;
    for (int i = 0; i < n; ++i)
      drift = std::max(drift,
                       std::abs(out.spline.knots()[static_cast<std::size_t>(i)] -
                                again.spline.knots()[static_cast<std::size_t>(i)]));
    if (drift > 1e-6 * a)
      throw SolverError(
          "strict check failed: independent initializations disagree (knot "
          "drift " +
          std::to_string(drift / a) + " relative)");
  }
  return out;
}

double phi(const Weight& f, const Weight& g, int r, int n, double a,
           const ExtremalConfig& config) {
  return solve_extremal(f, g, r, n, a, config).deviation;
}

std::vector<PhiPoint> phi_curve(const Weight& f, const Weight& g, int r, int n,
                                double a_min, double a_max, int samples,
                                const ExtremalConfig& config) {
  if (!(a_min > 0.0) || !(a_max >= a_min) || samples < 1)
    throw std::invalid_argument("phi_curve: need 0 < a_min <= a_max, samples >= 1");
  std::vector<PhiPoint> out;
  ExtremalConfig cfg = config;
  double prev_a = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double a =
        samples == 1 ? a_min
                     : a_min * std::pow(a_max / a_min,
                                        static_cast<double>(i) / (samples - 1));
    if (prev_a > 0.0) {  // rescale warm starts to the new interval
      for (double& k : cfg.initial_knots) k *= a / prev_a;
      for (double& t : cfg.warm_reference) t *= a / prev_a;
    }
    ExtremalResult res = solve_extremal(f, g, r, n, a, cfg);
    cfg.initial_knots = res.spline.knots();
    cfg.warm_reference = res.alternation_points;
    out.push_back({a, res.deviation});
    prev_a = a;
  }
  return out;
}

AForDeltaResult solve_a_for_delta(const Weight& f, const Weight& g, int r,
                                  int n, double delta, double a_hint,
                                  double max_a, double rel_tol,
                                  const ExtremalConfig& config) {
  if (!(delta > 0.0)) throw std::invalid_argument("solve_a_for_delta: delta > 0");
  ExtremalConfig cfg = config;
  double prev_a = 0.0;
  auto eval = [&](double a) {
    if (prev_a > 0.0) {
      for (double& k : cfg.initial_knots) k *= a / prev_a;
      for (double& t : cfg.warm_reference) t *= a / prev_a;
    }
    ExtremalResult res = solve_extremal(f, g, r, n, a, cfg);
    cfg.initial_knots = res.spline.knots();
    cfg.warm_reference = res.alternation_points;
    prev_a = a;
    return res;
  };

  double a = std::max(a_hint, 1e-8);
  ExtremalResult res = eval(a);
  double lo = 0.0, hi = 0.0;
  if (res.deviation >= delta) {
    hi = a;
    while (true) {
      const double a2 = 0.5 * a;
      ExtremalResult r2 = eval(a2);
      if (r2.deviation < delta) {
        lo = a2;
        break;
      }
      hi = a2;
      a = a2;
      res = std::move(r2);
      if (a < 1e-12)
        throw SolverError("solve_a_for_delta: lower bracket underflow");
    }
  } else {
    lo = a;
    double prev_phi = res.deviation;
    while (true) {
      const double a2 = 2.0 * a;
      if (a2 > max_a)
        throw RangeError(
            "interval cap reached with the deviation still below delta; the "
            "deviation may saturate below the requested level",
            prev_phi, a);
      ExtremalResult r2 = eval(a2);
      if (r2.deviation >= delta) {
        hi = a2;
        res = std::move(r2);
        break;
      }
      // saturation: doubling a no longer moves the deviation toward delta
      if (r2.deviation - prev_phi <= 1e-12 * std::max(delta, prev_phi))
        throw RangeError(
            "deviation saturates below delta; no interval attains it",
            r2.deviation, a2);
      prev_phi = r2.deviation;
      lo = a;
      a = a2;
    }
  }

  // bisection with a secant acceleration on the bracket [lo, hi]
  double phi_hi = res.deviation;
  double phi_lo = -1.0;
  ExtremalResult best = std::move(res);
  double best_a = hi;
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * hi; ++it) {
    double mid;
    if (phi_lo > 0.0 && phi_hi > phi_lo) {
      mid = lo + (hi - lo) * (delta - phi_lo) / (phi_hi - phi_lo);
      const double pad = 0.05 * (hi - lo);
      mid = std::clamp(mid, lo + pad, hi - pad);
    } else {
      mid = 0.5 * (lo + hi);
    }
    ExtremalResult rm = eval(mid);
    if (std::abs(rm.deviation - delta) <= 1e-12 * delta) {
      best = std::move(rm);
      best_a = mid;
      lo = hi = mid;
      break;
    }
    if (rm.deviation < delta) {
      lo = mid;
      phi_lo = rm.deviation;
    } else {
      hi = mid;
      phi_hi = rm.deviation;
      best = std::move(rm);
      best_a = mid;
    }
  }
  if (std::abs(best_a - hi) > 0.0 && hi != lo) {
    best = eval(hi);
    best_a = hi;
  }
  return {best_a, std::move(best)};
}

}  // namespace gsp
