#include "gsp/modulus.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace gsp {

namespace {

void validate_query(const ModulusQuery& q) {
  if (q.r < 2 || q.k < 1 || q.k > q.r - 1)
    throw std::invalid_argument("modulus: need 1 <= k <= r-1");
  if (q.tol <= 0.0) throw std::invalid_argument("modulus: tol > 0");
}

double aitken(const std::vector<TracePoint>& t) {
  const std::size_t m = t.size();
  const double v0 = t[m - 3].value, v1 = t[m - 2].value, v2 = t[m - 1].value;
  const double den = (v2 - v1) - (v1 - v0);
  if (den == 0.0) return v2;
  return v2 - (v2 - v1) * (v2 - v1) / den;
}

}  // namespace

ModulusResult omega_infinite_case(const ModulusQuery& q) {
  validate_query(q);
  if (!(q.delta > 0.0)) throw std::invalid_argument("modulus: delta > 0");
  ModulusResult out;
  out.r = q.r;
  out.k = q.k;
  out.delta = q.delta;
  out.f_kind = q.f.kind;
  out.g_kind = q.g.kind;
  out.sweep = "n";

  double a_hint = 1.0;
  int streak = 0;
  for (int n = 0; n <= q.max_n; ++n) {
    AForDeltaResult res =
        solve_a_for_delta(q.f, q.g, q.r, n, q.delta, a_hint, q.max_a,
                          1e-9, q.solver);
    a_hint = res.a;
    const double v = std::abs(res.solve.spline.eval(q.k, 0.0));
    out.trace.push_back({static_cast<double>(n), v, res.solve.deviation});
    if (n >= 1) {
      const double prev = out.trace[out.trace.size() - 2].value;
      const double rel = std::abs(v - prev) / std::max(std::abs(v), 1e-300);
      streak = rel < q.tol ? streak + 1 : 0;
    }
    if (streak >= 3) {
      out.converged = true;
      out.omega = v;
      out.spline = std::move(res.solve.spline);
      if (out.trace.size() >= 3) {
        out.richardson = aitken(out.trace);
        out.has_richardson = true;
      }
      out.diagnostics = "n-sweep plateau after " + std::to_string(n + 1) +
                        " solves (a_n = " + std::to_string(res.a) + ")";
      return out;
    }
  }
  throw NoConvergenceError(
      "n-sweep did not plateau by n = " + std::to_string(q.max_n),
      std::move(out.trace));
}

ModulusResult omega_finite_case(const ModulusQuery& q) {
  validate_query(q);
  if (q.n < 0) throw std::invalid_argument("modulus: n >= 0");
  ModulusResult out;
  out.r = q.r;
  out.k = q.k;
  out.n = q.n;
  out.f_kind = q.f.kind;
  out.g_kind = q.g.kind;
  out.sweep = "a";

  if (!(q.growth > 1.0))
    throw std::invalid_argument("modulus: a-sweep growth must exceed 1");
  ExtremalConfig cfg = q.solver;
  double prev_a = 0.0;
  int streak = 0;
  for (double a = 1.0; a <= q.max_a; a *= q.growth) {
    if (prev_a > 0.0) {
      for (double& kk : cfg.initial_knots) kk *= a / prev_a;
      for (double& t : cfg.warm_reference) t *= a / prev_a;
    }
    ExtremalResult res = solve_extremal(q.f, q.g, q.r, q.n, a, cfg);
    cfg.initial_knots = res.spline.knots();
    cfg.warm_reference = res.alternation_points;
    prev_a = a;
    const double v = std::abs(res.spline.eval(q.k, 0.0));
    out.trace.push_back({a, v, res.deviation});
    const std::size_t m = out.trace.size();
    if (m >= 2) {
      const auto& cur = out.trace[m - 1];
      const auto& prv = out.trace[m - 2];
      const double rel_v =
          std::abs(cur.value - prv.value) / std::max(std::abs(cur.value), 1e-300);
      const double rel_phi =
          std::abs(cur.phi - prv.phi) / std::max(std::abs(cur.phi), 1e-300);
      streak = (rel_v < q.tol && rel_phi < q.tol) ? streak + 1 : 0;
    }
    if (streak >= 3) {
      out.converged = true;
      out.omega = v;
      out.phi_infinity = res.deviation;
      out.spline = std::move(res.spline);
      if (out.trace.size() >= 3) {
        out.richardson = aitken(out.trace);
        out.has_richardson = true;
      }
      out.diagnostics =
          "a-sweep plateau at a = " + std::to_string(a) +
          " (phi and |G^(k)(0)| both within tol for 3 grid steps)";
      return out;
    }
  }
  throw NoConvergenceError(
      "a-sweep reached max a without a plateau (raise --max-a)",
      std::move(out.trace));
}

std::string ModulusResult::to_json() const {
  nlohmann::json j;
  j["query"]["r"] = r;
  j["query"]["k"] = k;
  j["query"]["f"] = f_kind;
  j["query"]["g"] = g_kind;
  j["query"]["sweep"] = sweep;
  if (sweep == "n")
    j["query"]["delta"] = delta;
  else
    j["query"]["n"] = n;
  j["omega"] = omega;
  auto arr = nlohmann::json::array();
  for (const auto& t : trace)
    arr.push_back({{"param", t.param}, {"value", t.value}, {"phi", t.phi}});
  j["trace"] = std::move(arr);
  j["converged"] = converged;
  nlohmann::json d;
  d["note"] = diagnostics;
  if (has_richardson) d["richardson"] = richardson;
  if (sweep == "a") d["phi_infinity"] = phi_infinity;
  j["diagnostics"] = std::move(d);
  if (spline) j["spline"] = nlohmann::json::parse(spline->to_json());
  return j.dump(2);
}

FloorReport asymptotic_floor(const Weight& f, const Weight& g, int r) {
  if (r < 1) throw std::invalid_argument("asymptotic_floor: r >= 1");
  FloorReport out;
  out.notion =
      "sampled lim inf (tail minimum of f/|P_r| over the reliable window)";

  std::vector<AEntry> A = compute_A(g, r);
  std::vector<double> values;
  for (const auto& e : A) {
    if (e.state != EntryState::Finite) {
      out.diagnostics =
          "A_" + std::to_string(values.size()) +
          " is not finite; P_r undefined (classification is not FINITE)";
      return out;
    }
    values.push_back(e.value);
  }
  PFamily p(g, values);

  // noise floor of the alternating P_r expression, from its size near 0
  double head = 0.0;
  for (int i = 0; i <= 32; ++i)
    head = std::max(head, std::abs(p.eval(r, i / 32.0)));
  const double noise = 1e-12 * (head + 1e-300);

  const double t0 = 0.5, t1 = 1e3;
  const int n_pts = 4000;
  std::vector<double> ts, ratio;
  for (int i = 0; i <= n_pts; ++i) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / n_pts);
    const double pr = std::abs(p.eval(r, t));
    if (pr < 1e4 * noise) break;  // cancellation territory
    ts.push_back(t);
    ratio.push_back(f(t) / pr);
  }
  if (ts.size() < 16) {
    out.diagnostics = "reliable window too short to read a tail trend";
    return out;
  }
  out.reliable_end = ts.back();

  const std::size_t m = ts.size();
  const std::size_t q3 = 3 * m / 4;
  double tail_min = ratio[q3];
  for (std::size_t i = q3; i < m; ++i) tail_min = std::min(tail_min, ratio[i]);
  const double growth = ratio[m - 1] / std::max(ratio[q3], 1e-300);
  const bool rising = ratio[m - 1] >= ratio[m - 2] && ratio[m - 2] >= ratio[m - 3];

  if (growth > 10.0 && rising) {
    out.kind = FloorKind::Zero;
    out.diagnostics = "f/|P_r| grows by " + std::to_string(growth) +
                      "x over the last quarter of the window";
    return out;
  }
  if (growth < 1.05 && growth > 1.0 / 1.05) {
    out.kind = FloorKind::Positive;
    out.c = tail_min;
    out.bound = out.c > 0.0 ? 0.5 / out.c : 0.0;
    out.diagnostics = "ratio levels off near " + std::to_string(tail_min);
    return out;
  }
  if (growth <= 1.0) {  // decreasing ratio still has a finite lim inf
    out.kind = FloorKind::Positive;
    out.c = tail_min;
    out.bound = out.c > 0.0 ? 0.5 / out.c : 0.0;
    out.diagnostics = "ratio non-increasing on the tail; lim inf <= " +
                      std::to_string(tail_min);
    return out;
  }
  out.diagnostics = "moderate growth " + std::to_string(growth) +
                    " on the tail; window too short to classify";
  return out;
}

std::string FloorReport::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case FloorKind::Positive: j["kind"] = "FLOOR-POSITIVE"; break;
    case FloorKind::Zero: j["kind"] = "FLOOR-ZERO"; break;
    case FloorKind::Inconclusive: j["kind"] = "INCONCLUSIVE"; break;
  }
  if (kind == FloorKind::Positive) {
    j["c"] = c;
    j["bound"] = bound;
  }
  j["reliable_end"] = reliable_end;
  j["notion"] = notion;
  j["diagnostics"] = diagnostics;
  return j.dump(2);
}

namespace {

double sup_weighted(const std::function<double(double)>& num,
                    const std::function<double(double)>& den, double a) {
  const int n = 8192;
  auto W = [&](double t) { return std::abs(num(t)) / den(t); };
  double best = 0.0, best_t = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = a * i / n;
    const double v = W(t);
    if (v > best) {
      best = v;
      best_t = t;
    }
  }
  double lo = std::max(0.0, best_t - a / n), hi = std::min(a, best_t + a / n);
  for (int it = 0; it < 60; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (W(m1) < W(m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::max(best, W(0.5 * (lo + hi)));
}

}  // namespace

MordellReport verify_mordell(const std::function<double(double)>& x,
                             const std::function<double(double)>& dx,
                             const std::function<double(double)>& ddx,
                             double a, const Weight& f, const Weight& g) {
  MordellReport rep;
  rep.n0 = sup_weighted(x, [&](double t) { return f(t); }, a);
  rep.n1 = sup_weighted(dx, [&](double t) { return std::sqrt(f(t) * g(t)); }, a);
  rep.n2 = sup_weighted(ddx, [&](double t) { return g(t); }, a);
  rep.lhs = rep.n1;
  rep.rhs = 2.0 * std::sqrt(rep.n0 * rep.n2);
  rep.margin = rep.rhs - rep.lhs;
  return rep;
}

MordellReport verify_mordell(const PerfectGSpline& x, const Weight& f,
                             const Weight& g) {
  if (x.order() < 2)
    throw std::invalid_argument("verify_mordell: needs a spline of order >= 2");
  return verify_mordell([&](double t) { return x.eval(0, t); },
                        [&](double t) { return x.eval(1, t); },
                        [&](double t) { return x.eval(2, t); },
                        x.interval_end(), f, g);
}

std::string MordellReport::to_json() const {
  nlohmann::json j;
  j["n0"] = n0;
  j["n1"] = n1;
  j["n2"] = n2;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["margin"] = margin;
  return j.dump(2);
}

double matorin_constant(int k, int r) {
  if (k < 1 || k >= r || r > 10)
    throw std::invalid_argument("matorin_constant: need 1 <= k < r <= 10");
  // T_r^{(k)}(1) = prod_{j=0}^{k-1} (r^2 - j^2) / (2j + 1)
  double num = 1.0;
  for (int j = 0; j < k; ++j)
    num *= static_cast<double>(r) * r - static_cast<double>(j) * j;
  for (int j = 0; j < k; ++j) num /= 2.0 * j + 1.0;
  double den = 1.0;  // T_r^{(r)}(1) = 2^{r-1} r!
  for (int i = 2; i <= r; ++i) den *= i;
  den *= std::pow(2.0, r - 1);
  return num / std::pow(den, static_cast<double>(k) / r);
}

bool matorin_sharp(int r) { return r == 2 || r == 3; }

}  // namespace gsp
