#include "gsp/equioscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace gsp {

void cheb_values(double t, double a, std::vector<double>& out) {
  const double x = 2.0 * t / a - 1.0;
  if (out.empty()) return;
  out[0] = 1.0;
  if (out.size() > 1) out[1] = x;
  for (std::size_t j = 2; j < out.size(); ++j)
    out[j] = 2.0 * x * out[j - 1] - out[j - 2];
}

namespace {

double clenshaw(const std::vector<double>& c, double t, double a) {
  const double x = 2.0 * t / a - 1.0;
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = c.size(); j-- > 1;) {
    const double b0 = 2.0 * x * b1 - b2 + c[j];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + (c.empty() ? 0.0 : c[0]);
}

struct Extremum {
  double t, value;
};

double refine(const std::function<double(double)>& W, double lo, double hi,
              bool maximize) {
  for (int it = 0; it < 60; ++it) {
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

std::vector<Extremum> find_extrema(const std::function<double(double)>& W,
                                   double a, int n_grid) {
  std::vector<double> ts(static_cast<std::size_t>(n_grid) + 1),
      vs(static_cast<std::size_t>(n_grid) + 1);
  for (int i = 0; i <= n_grid; ++i) {
    // Chebyshev-distributed grid clusters near the endpoints
    ts[static_cast<std::size_t>(i)] =
        0.5 * a * (1.0 - std::cos(M_PI * i / n_grid));
    vs[static_cast<std::size_t>(i)] = W(ts[static_cast<std::size_t>(i)]);
  }
  std::vector<Extremum> out;
  out.push_back({0.0, vs[0]});
  for (int i = 1; i < n_grid; ++i) {
    const double dl = vs[static_cast<std::size_t>(i)] - vs[static_cast<std::size_t>(i - 1)];
    const double dr = vs[static_cast<std::size_t>(i + 1)] - vs[static_cast<std::size_t>(i)];
    if (dl * dr <= 0.0 && (dl != 0.0 || dr != 0.0)) {
      const bool maximize = vs[static_cast<std::size_t>(i)] >=
                            std::max(vs[static_cast<std::size_t>(i - 1)],
                                     vs[static_cast<std::size_t>(i + 1)]);
      const double t = refine(W, ts[static_cast<std::size_t>(i - 1)],
                              ts[static_cast<std::size_t>(i + 1)], maximize);
      out.push_back({t, W(t)});
    }
  }
  out.push_back({a, vs[static_cast<std::size_t>(n_grid)]});
  return out;
}

// coalesce same-sign runs (keep the largest magnitude), then reduce to
// exactly `want` points by repeatedly deleting the weakest extremum —
// endpoint-only trimming can keep a weak interior pair in every reference
// and make the exchange cycle
std::vector<Extremum> alternating_subset(std::vector<Extremum> cand,
                                         int want) {
  std::vector<Extremum> alt;
  for (const auto& c : cand) {
    if (c.value == 0.0) continue;
    const int s = c.value > 0.0 ? 1 : -1;
    if (!alt.empty() && (alt.back().value > 0.0 ? 1 : -1) == s) {
      if (std::abs(c.value) > std::abs(alt.back().value)) alt.back() = c;
    } else {
      alt.push_back(c);
    }
  }
  while (static_cast<int>(alt.size()) > want) {
    if (static_cast<int>(alt.size()) == want + 1) {
      // parity step: drop the weaker endpoint
      if (std::abs(alt.front().value) < std::abs(alt.back().value))
        alt.erase(alt.begin());
      else
        alt.pop_back();
      continue;
    }
    // delete the globally weakest point; removing an interior point leaves
    // two same-sign neighbors, merge them keeping the stronger one
    std::size_t weakest = 0;
    for (std::size_t i = 1; i < alt.size(); ++i)
      if (std::abs(alt[i].value) < std::abs(alt[weakest].value)) weakest = i;
    if (weakest > 0 && weakest + 1 < alt.size()) {
      if (std::abs(alt[weakest - 1].value) < std::abs(alt[weakest + 1].value))
        alt[weakest - 1] = alt[weakest + 1];
      alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(weakest),
                alt.begin() + static_cast<std::ptrdiff_t>(weakest) + 2);
    } else {
      alt.erase(alt.begin() + static_cast<std::ptrdiff_t>(weakest));
    }
  }
  return alt;
}

WeightedApproxResult weighted_midrange(const std::function<double(double)>& h,
                                       const Weight& f, double a) {
  const int n = 4096;
  std::vector<double> ts(n + 1), hs(n + 1), fs(n + 1);
  double hmin = 1e300, hmax = -1e300;
  for (int i = 0; i <= n; ++i) {
    ts[static_cast<std::size_t>(i)] = a * i / n;
    hs[static_cast<std::size_t>(i)] = h(ts[static_cast<std::size_t>(i)]);
    fs[static_cast<std::size_t>(i)] = f(ts[static_cast<std::size_t>(i)]);
    hmin = std::min(hmin, hs[static_cast<std::size_t>(i)]);
    hmax = std::max(hmax, hs[static_cast<std::size_t>(i)]);
  }
  auto upper = [&](double c) {  // max (h - c)/f
    double v = -1e300;
    for (int i = 0; i <= n; ++i)
      v = std::max(v, (hs[static_cast<std::size_t>(i)] - c) / fs[static_cast<std::size_t>(i)]);
    return v;
  };
  auto lower = [&](double c) {  // max (c - h)/f
    double v = -1e300;
    for (int i = 0; i <= n; ++i)
      v = std::max(v, (c - hs[static_cast<std::size_t>(i)]) / fs[static_cast<std::size_t>(i)]);
    return v;
  };
  double lo = hmin, hi = hmax;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    (upper(mid) > lower(mid) ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  WeightedApproxResult out;
  out.poly = {c};
  out.cheb = {c};
  out.deviation = std::max(upper(c), lower(c));
  if (out.deviation < 1e-14 * (std::abs(hmax) + std::abs(hmin) + 1.0))
    out.deviation = 0.0;
  double tp = 0.0, tm = 0.0, vp = -1e300, vm = -1e300;
  for (int i = 0; i <= n; ++i) {
    const double e = (hs[static_cast<std::size_t>(i)] - c) / fs[static_cast<std::size_t>(i)];
    if (e > vp) { vp = e; tp = ts[static_cast<std::size_t>(i)]; }
    if (-e > vm) { vm = -e; tm = ts[static_cast<std::size_t>(i)]; }
  }
  out.alternation_points = {std::min(tp, tm), std::max(tp, tm)};
  out.iterations = 1;
  out.residual_history = {out.deviation};
  return out;
}

}  // namespace

WeightedApproxResult best_weighted_poly(
    const std::function<double(double)>& h, const Weight& f, int degree,
    double a, const RemezOptions& options) {
  if (degree < 0) throw std::invalid_argument("best_weighted_poly: m >= 0");
  if (!(a > 0.0)) throw std::invalid_argument("best_weighted_poly: a > 0");
  if (degree == 0) return weighted_midrange(h, f, a);

  const int m = degree;
  const int npts = m + 2;
  std::vector<double> ref;
  if (static_cast<int>(options.warm_reference.size()) == npts &&
      std::is_sorted(options.warm_reference.begin(),
                     options.warm_reference.end()) &&
      options.warm_reference.front() >= 0.0 &&
      options.warm_reference.back() <= a) {
    ref = options.warm_reference;
  } else {
    ref.resize(static_cast<std::size_t>(npts));
    for (int i = 0; i < npts; ++i)
      ref[static_cast<std::size_t>(i)] =
          0.5 * a * (1.0 - std::cos(M_PI * i / (npts - 1)));
  }

  const int n_grid = std::max({options.grid, 32 * npts, 1024});
  std::vector<double> history;
  std::vector<double> cheb(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<double> tvals(static_cast<std::size_t>(m) + 1);
  double lambda = 0.0;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Eigen::MatrixXd A(npts, npts);
    Eigen::VectorXd rhs(npts);
    for (int i = 0; i < npts; ++i) {
      cheb_values(ref[static_cast<std::size_t>(i)], a, tvals);
      for (int j = 0; j <= m; ++j) A(i, j) = tvals[static_cast<std::size_t>(j)];
      A(i, m + 1) = (i % 2 == 0 ? 1.0 : -1.0) * f(ref[static_cast<std::size_t>(i)]);
      rhs(i) = h(ref[static_cast<std::size_t>(i)]);
    }
    Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    for (int j = 0; j <= m; ++j) cheb[static_cast<std::size_t>(j)] = sol(j);
    lambda = sol(m + 1);

    auto residual = [&](double t) {
      return (h(t) - clenshaw(cheb, t, a)) / f(t);
    };
    auto cand = find_extrema(residual, a, n_grid);
    double emax = 0.0, hmax = 0.0, rmax = 0.0, fmin = 1e300;
    for (const auto& c : cand) {
      emax = std::max(emax, std::abs(c.value));
      const double hv = h(c.t);
      hmax = std::max(hmax, std::abs(hv));
      rmax = std::max(rmax, std::abs(hv - clenshaw(cheb, c.t, a)));
      fmin = std::min(fmin, f(c.t));
    }
    history.push_back(emax);
    // roundoff floor of the weighted residual; a decaying f amplifies the
    // cancellation noise of h - Q near the right end
    const double noise =
        64.0 * std::numeric_limits<double>::epsilon() * hmax / fmin;

    if (rmax <= 1e-13 * hmax) {  // h is (numerically) in the space
      WeightedApproxResult out;
      out.cheb = cheb;
      out.poly = cheb_to_monomial(cheb, a);
      out.deviation = 0.0;
      out.alternation_points = ref;
      out.iterations = iter;
      out.residual_history = std::move(history);
      return out;
    }

    if (emax - std::abs(lambda) <= options.tol * emax + noise) {
      WeightedApproxResult out;
      out.cheb = cheb;
      out.poly = cheb_to_monomial(cheb, a);
      out.deviation = std::abs(lambda);
      out.alternation_points = ref;
      out.iterations = iter;
      out.residual_history = std::move(history);
      return out;
    }

    auto next = alternating_subset(std::move(cand), npts);
    if (static_cast<int>(next.size()) < npts)
      throw RemezConvergenceError(
          "Remez exchange lost alternation points (found " +
              std::to_string(next.size()) + ", need " + std::to_string(npts) +
              ")",
          history);
    for (int i = 0; i < npts; ++i) ref[static_cast<std::size_t>(i)] = next[static_cast<std::size_t>(i)].t;
  }
  throw RemezConvergenceError("Remez exchange did not level within " +
                                  std::to_string(options.max_iterations) +
                                  " iterations",
                              history);
}

ExtremaList weighted_extrema(const std::function<double(double)>& residual,
                             const Weight& f, double a, int hint) {
  auto W = [&](double t) { return residual(t) / f(t); };
  auto cand = find_extrema(W, a, std::max(1024, 64 * std::max(hint, 1)));
  // degenerate residual: every value at noise level
  double scale = 0.0;
  for (const auto& c : cand) scale = std::max(scale, std::abs(c.value));
  ExtremaList out;
  if (scale <= 1e-300) {
    out.shortage = hint > 0;
    return out;
  }
  for (const auto& c : cand) out.points.push_back(c.t);
  std::sort(out.points.begin(), out.points.end());
  out.points.erase(std::unique(out.points.begin(), out.points.end(),
                               [a](double x, double y) {
                                 return std::abs(x - y) < 1e-9 * a;
                               }),
                   out.points.end());
  out.shortage = static_cast<int>(out.points.size()) < hint;
  return out;
}

std::vector<double> cheb_to_monomial(const std::vector<double>& cheb,
                                     double a) {
  const std::size_t n = cheb.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  // monomial images of T_j(2t/a - 1) by recurrence
  std::vector<double> prev{1.0}, cur{-1.0, 2.0 / a};
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double>& tj = (j == 0) ? prev : cur;
    for (std::size_t i = 0; i < tj.size(); ++i) out[i] += cheb[j] * tj[i];
    if (j + 1 < n && j >= 1) {
      // T_{j+1} = (4t/a - 2) T_j - T_{j-1}
      std::vector<double> next(cur.size() + 1, 0.0);
      for (std::size_t i = 0; i < cur.size(); ++i) {
        next[i + 1] += 4.0 / a * cur[i];
        next[i] -= 2.0 * cur[i];
      }
      for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
      prev = std::move(cur);
      cur = std::move(next);
    }
  }
  return out;
}

}  // namespace gsp
