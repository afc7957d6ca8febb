#include "gsp/gspline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace gsp {

namespace {

double factorial(int n) {
  double v = 1.0;
  for (int i = 2; i <= n; ++i) v *= i;
  return v;
}

double binom(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

}  // namespace

PerfectGSpline::PerfectGSpline(int r, double a, std::vector<double> knots,
                               int epsilon, std::vector<double> poly, Weight g,
                               std::shared_ptr<const MomentTable> table,
                               double table_tol)
    : r_(r),
      a_(a),
      knots_(std::move(knots)),
      epsilon_(epsilon),
      poly_(std::move(poly)),
      g_(std::move(g)),
      table_(std::move(table)) {
  if (r_ < 1) throw std::invalid_argument("PerfectGSpline: r >= 1");
  if (!(a_ > 0.0)) throw std::invalid_argument("PerfectGSpline: a > 0");
  if (epsilon_ != 1 && epsilon_ != -1)
    throw std::invalid_argument("PerfectGSpline: epsilon must be +-1");
  if (static_cast<int>(poly_.size()) != r_)
    throw std::invalid_argument("PerfectGSpline: poly needs r coefficients");
  double prev = 0.0;
  for (double k : knots_) {
    if (!(k > prev) || !(k < a_))
      throw std::invalid_argument(
          "PerfectGSpline: knots must be strictly increasing inside (0, a)");
    prev = k;
  }
  if (!table_)
    table_ = std::make_shared<MomentTable>(g_, r_ - 1, a_, table_tol);
  if (table_->max_order() < r_ - 1 || table_->domain_end() < a_ * (1.0 - 1e-12))
    throw std::invalid_argument("PerfectGSpline: moment table too small");

  // signed moment prefix sums at knots (base sign +1 on the first interval)
  const std::size_t n = knots_.size();
  prefix_.assign(static_cast<std::size_t>(r_),
                 std::vector<double>(n + 1, 0.0));
  std::vector<double> prev_m(static_cast<std::size_t>(r_), 0.0);
  std::vector<double> m(static_cast<std::size_t>(r_), 0.0);
  double sign = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    table_->moments_at(knots_[i], m);
    for (int j = 0; j < r_; ++j)
      prefix_[static_cast<std::size_t>(j)][i + 1] =
          prefix_[static_cast<std::size_t>(j)][i] +
          sign * (m[static_cast<std::size_t>(j)] - prev_m[static_cast<std::size_t>(j)]);
    prev_m = m;
    sign = -sign;
  }
}

double PerfectGSpline::kernel(int d, double t) const {
  const int q = r_ - 1 - d;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
  const double k_i = i == 0 ? 0.0 : knots_[i - 1];
  const double sign = (i % 2 == 0) ? 1.0 : -1.0;

  double m[32], mk[32];
  table_->moments_at(t, std::span<double>(m, static_cast<std::size_t>(q) + 1));
  if (i == 0) {
    std::fill(mk, mk + q + 1, 0.0);
  } else {
    table_->moments_at(k_i, std::span<double>(mk, static_cast<std::size_t>(q) + 1));
  }
  double acc = 0.0;
  double alt = 1.0;
  for (int j = 0; j <= q; ++j) {
    const double s_j = prefix_[static_cast<std::size_t>(j)][i] + sign * (m[j] - mk[j]);
    acc += binom(q, j) * std::pow(t, q - j) * alt * s_j;
    alt = -alt;
  }
  return acc / factorial(q);
}

double PerfectGSpline::eval(int d, double t) const {
  if (d < 0 || d > r_)
    throw std::invalid_argument("PerfectGSpline: derivative order 0..r");
  if (t < -1e-12 * a_ || t > a_ * (1.0 + 1e-12))
    throw std::domain_error("PerfectGSpline: t outside [0, a]");
  t = std::clamp(t, 0.0, a_);
  if (d == r_) {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin());
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    return epsilon_ * sign * g_(t);
  }
  double p = 0.0;
  for (int i = r_ - 1; i >= d; --i)
    p = p * t + poly_[static_cast<std::size_t>(i)] * factorial(i) / factorial(i - d);
  return epsilon_ * kernel(d, t) - p;
}

void PerfectGSpline::negate() {
  epsilon_ = -epsilon_;
  for (double& c : poly_) c = -c;
}

std::string PerfectGSpline::to_json() const {
  nlohmann::json j;
  j["r"] = r_;
  j["a"] = a_;
  j["epsilon"] = epsilon_;
  j["knots"] = knots_;
  j["poly"] = poly_;
  j["g"] = g_.kind;
  return j.dump(2);
}

PerfectGSpline PerfectGSpline::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Weight g = parse_weight(j.at("g").get<std::string>());
  return PerfectGSpline(j.at("r").get<int>(), j.at("a").get<double>(),
                        j.at("knots").get<std::vector<double>>(),
                        j.at("epsilon").get<int>(),
                        j.at("poly").get<std::vector<double>>(), std::move(g));
}

int count_sign_changes(const PerfectGSpline& s, int d, int grid) {
  const double a = s.interval_end();
  std::vector<double> v(static_cast<std::size_t>(grid) + 1);
  double vmax = 0.0;
  for (int i = 0; i <= grid; ++i) {
    v[static_cast<std::size_t>(i)] = s.eval(d, a * i / grid);
    vmax = std::max(vmax, std::abs(v[static_cast<std::size_t>(i)]));
  }
  const double cut = 1e-10 * vmax;
  int changes = 0;
  int last_sign = 0;
  for (int i = 0; i <= grid; ++i) {
    const double x = v[static_cast<std::size_t>(i)];
    if (std::abs(x) <= cut) continue;
    const int sign = x > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++changes;
    last_sign = sign;
  }
  return changes;
}

namespace {

// ternary search for an extremum of W inside [lo, hi]
double refine_extremum(const std::function<double(double)>& W, double lo,
                       double hi, bool maximize) {
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    const double f1 = W(m1), f2 = W(m2);
    if ((maximize && f1 < f2) || (!maximize && f1 > f2))
      lo = m1;
    else
      hi = m2;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CertificateCheck check_certificate(const PerfectGSpline& s, const Weight& f,
                                   double tol) {
  CertificateCheck out;
  const double a = s.interval_end();
  const int expected = static_cast<int>(s.knots().size()) + s.order() + 1;
  auto W = [&](double t) { return s.eval(0, t) / f(t); };

  const int n = std::max(4096, 64 * expected);
  std::vector<double> ts(static_cast<std::size_t>(n) + 1),
      vs(static_cast<std::size_t>(n) + 1);
  double gmax = 0.0, fmin = 1e300;
  for (int i = 0; i <= n; ++i) {
    ts[static_cast<std::size_t>(i)] = a * i / n;
    vs[static_cast<std::size_t>(i)] = W(ts[static_cast<std::size_t>(i)]);
    gmax = std::max(gmax, std::abs(s.eval(0, ts[static_cast<std::size_t>(i)])));
    fmin = std::min(fmin, f(ts[static_cast<std::size_t>(i)]));
  }
  // roundoff floor of |G|/f when f decays much faster than G
  const double noise =
      64.0 * std::numeric_limits<double>::epsilon() * gmax / fmin;

  struct Extremum {
    double t, w;
  };
  std::vector<Extremum> cand;
  cand.push_back({0.0, vs[0]});
  for (int i = 1; i < n; ++i) {
    const double dl = vs[static_cast<std::size_t>(i)] - vs[static_cast<std::size_t>(i - 1)];
    const double dr = vs[static_cast<std::size_t>(i + 1)] - vs[static_cast<std::size_t>(i)];
    if (dl * dr <= 0.0 && (dl != 0.0 || dr != 0.0)) {
      const bool maximize = vs[static_cast<std::size_t>(i)] >=
                            std::max(vs[static_cast<std::size_t>(i - 1)],
                                     vs[static_cast<std::size_t>(i + 1)]);
      const double t = refine_extremum(W, ts[static_cast<std::size_t>(i - 1)],
                                       ts[static_cast<std::size_t>(i + 1)], maximize);
      cand.push_back({t, W(t)});
    }
  }
  cand.push_back({a, vs[static_cast<std::size_t>(n)]});

  double dev_est = 0.0;
  for (const auto& c : cand) dev_est = std::max(dev_est, std::abs(c.w));
  if (dev_est <= 0.0) {
    out.failure = "NOT-EXTREMAL: residual vanishes";
    return out;
  }

  // drop noise-level ripples, then coalesce same-sign runs keeping the larger
  std::vector<Extremum> alt;
  for (const auto& c : cand) {
    if (std::abs(c.w) < 0.01 * dev_est) continue;
    const int sign = c.w > 0.0 ? 1 : -1;
    if (!alt.empty() && (alt.back().w > 0.0 ? 1 : -1) == sign) {
      if (std::abs(c.w) > std::abs(alt.back().w)) alt.back() = c;
    } else {
      alt.push_back(c);
    }
  }

  if (static_cast<int>(alt.size()) < expected) {
    out.failure = "NOT-EXTREMAL: only " + std::to_string(alt.size()) +
                  " alternation points, expected " + std::to_string(expected);
    return out;
  }
  if (static_cast<int>(alt.size()) > expected) {
    out.failure = "NOT-EXTREMAL: " + std::to_string(alt.size()) +
                  " alternation points, expected " + std::to_string(expected);
    return out;
  }
  if (std::abs(alt.back().t - a) > 1e-9 * a) {
    out.failure = "last alternation point is not at a";
    return out;
  }
  alt.back().t = a;

  EquioscillationCertificate cert;
  double gap = 0.0;
  for (const auto& e : alt) {
    cert.points.push_back(e.t);
    cert.signs.push_back(e.w > 0.0 ? 1 : -1);
    gap = std::max(gap, std::abs(std::abs(e.w) - dev_est));
  }
  cert.deviation = dev_est;
  cert.gap = gap;
  if (gap > tol * dev_est + noise) {
    out.certificate = cert;
    out.failure = "weighted magnitudes not levelled: gap " +
                  std::to_string(gap / dev_est) + " (relative)";
    return out;
  }
  out.ok = true;
  out.certificate = std::move(cert);
  return out;
}

std::string certificate_to_json(const EquioscillationCertificate& c) {
  nlohmann::json j;
  j["points"] = c.points;
  j["signs"] = c.signs;
  j["deviation"] = c.deviation;
  j["gap"] = c.gap;
  return j.dump(2);
}

}  // namespace gsp
