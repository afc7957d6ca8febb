#include "gsp/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

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

// g_k(t) from moments via the binomial expansion of the iterated kernel:
// g_k(t) = 1/(k-1)! * int_0^t (t-s)^{k-1} g(s) ds.
double primitive_from_moments(const MomentTable& table, int k, double t) {
  if (k == 0) return table.weight()(t);
  double m[32];
  table.moments_at(t, std::span<double>(m, static_cast<std::size_t>(k)));
  double acc = 0.0;
  double sign = 1.0;
  for (int j = 0; j < k; ++j) {
    acc += binom(k - 1, j) * std::pow(t, k - 1 - j) * sign * m[j];
    sign = -sign;
  }
  return acc / factorial(k - 1);
}

}  // namespace

MomentTable::MomentTable(Weight w, int max_j, double T, double tol)
    : w_(std::move(w)), max_j_(max_j), tol_(tol) {
  if (max_j < 0 || max_j > 30)
    throw std::invalid_argument("MomentTable: max_j out of range");
  if (!(T > 0.0) || !(tol > 0.0))
    throw std::invalid_argument("MomentTable: T and tol must be positive");
  density_ = tol / std::max(T, 1.0);  // error budget per unit length
  grid_.push_back(0.0);
  cum_.assign(static_cast<std::size_t>(max_j) + 1, {0.0});
  append_range(0.0, T);
}

void MomentTable::append_range(double from, double to) {
  // coarse chunks first; append_cell refines each recursively
  const int chunks = std::max(1, static_cast<int>((to - from) / 4.0));
  for (int i = 0; i < chunks; ++i) {
    const double a = from + (to - from) * i / chunks;
    const double b = from + (to - from) * (i + 1) / chunks;
    append_cell(a, b, 0);
  }
}

void MomentTable::append_cell(double a, double b, int depth) {
  double vals[32], errs[32];
  const int count = max_j_ + 1;
  gk15_moments(w_.eval, a, b, vals, errs, count);
  const double allowed = density_ * (b - a);
  bool refine = false;
  for (int j = 0; j < count; ++j) {
    // roundoff floor: once the estimate is at machine precision relative to
    // the accumulated moment, further bisection cannot help
    const double floor_j =
        64.0 * std::numeric_limits<double>::epsilon() *
        (std::abs(vals[j]) + std::abs(cum_[static_cast<std::size_t>(j)].back()));
    if (errs[j] > std::max(allowed, floor_j)) refine = true;
  }
  if (refine && depth < 30) {
    const double mid = 0.5 * (a + b);
    append_cell(a, mid, depth + 1);
    append_cell(mid, b, depth + 1);
    return;
  }
  grid_.push_back(b);
  for (int j = 0; j < count; ++j)
    cum_[static_cast<std::size_t>(j)].push_back(
        cum_[static_cast<std::size_t>(j)].back() + vals[j]);
}

void MomentTable::extend_to(double T2) {
  if (T2 <= domain_end()) return;
  append_range(domain_end(), T2);
}

void MomentTable::moments_at(double t, std::span<double> out) const {
  const double end = grid_.back();
  if (t < -1e-12 || t > end * (1.0 + 1e-12) + 1e-300)
    throw std::domain_error("MomentTable: t outside [0, T]");
  t = std::clamp(t, 0.0, end);
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t i =
      static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid_.begin(), 1)) - 1;
  const int count = static_cast<int>(out.size());
  double vals[32], errs[32];
  gk15_moments(w_.eval, grid_[i], t, vals, errs, count);
  for (int j = 0; j < count; ++j)
    out[static_cast<std::size_t>(j)] = cum_[static_cast<std::size_t>(j)][i] + vals[j];
}

double MomentTable::moment(int j, double t) const {
  if (j < 0 || j > max_j_)
    throw std::invalid_argument("MomentTable: moment order out of range");
  double buf[32];
  moments_at(t, std::span<double>(buf, static_cast<std::size_t>(j) + 1));
  return buf[j];
}

PrimitiveTable::PrimitiveTable(int k, std::shared_ptr<const MomentTable> table)
    : k_(k), table_(std::move(table)) {
  if (k_ < 0) throw std::invalid_argument("PrimitiveTable: negative order");
  if (k_ > 0 && table_->max_order() < k_ - 1)
    throw std::invalid_argument("PrimitiveTable: moment table too shallow");
}

double PrimitiveTable::operator()(double t) const {
  return primitive_from_moments(*table_, k_, t);
}

PrimitiveTable build_primitive_table(const Weight& g, int k, double T,
                                     double tol) {
  if (k < 0) throw std::invalid_argument("build_primitive_table: k >= 0");
  if (!(T > 0.0) || !(tol > 0.0))
    throw std::invalid_argument("build_primitive_table: T, tol > 0");
  auto table =
      std::make_shared<MomentTable>(g, std::max(k - 1, 0), T, tol);
  return PrimitiveTable(k, std::move(table));
}

std::vector<AEntry> compute_A(const Weight& g, int r, double tol) {
  if (r < 1) throw std::invalid_argument("compute_A: r >= 1");
  std::vector<AEntry> out(static_cast<std::size_t>(r));

  // A_0 = int_0^inf g, using the tail descriptor where it is analytic
  AEntry& a0 = out[0];
  const TailDescriptor& tail = g.tail;
  if (tail.cls == TailClass::Constant && tail.level > 0.0) {
    a0.state = EntryState::Divergent;
  } else if (tail.cls == TailClass::Power) {
    if (tail.rate <= 1.0) {
      a0.state = EntryState::Divergent;
    } else {
      // integrate to T, then close with the power-law tail estimate
      double T = 1.0;
      double total = integrate(g.eval, 0.0, T, 0.25 * tol).value;
      double tail_est = g(T) * (1.0 + T) / (tail.rate - 1.0);
      while (tail_est > 0.5 * tol && T < 1e12) {
        total += integrate(g.eval, T, 2.0 * T, 0.25 * tol).value;
        T *= 2.0;
        tail_est = g(T) * (1.0 + T) / (tail.rate - 1.0);
      }
      a0.state = EntryState::Finite;
      a0.value = total + tail_est;
      a0.error = tol;
      a0.horizon = T;
    }
  } else {
    const bool certified = tail.integrable();
    ImproperResult res =
        integrate_to_infinity(g.eval, tol, certified, 1.0, 1e9);
    a0.value = res.value;
    a0.error = res.error;
    a0.horizon = res.horizon;
    a0.heuristic = res.heuristic;
    switch (res.status) {
      case TailStatus::Converged: a0.state = EntryState::Finite; break;
      case TailStatus::Divergent: a0.state = EntryState::Divergent; break;
      default: a0.state = EntryState::Inconclusive; break;
    }
  }
  if (a0.state != EntryState::Finite) {
    for (int k = 1; k < r; ++k) out[static_cast<std::size_t>(k)].state =
        EntryState::NotEvaluated;
    return out;
  }

  std::vector<double> finite{a0.value};
  for (int k = 1; k < r; ++k) {
    AEntry& ak = out[static_cast<std::size_t>(k)];
    PFamily pf(g, finite, 0.1 * tol);
    auto integrand = [&pf, k](double t) { return pf.eval(k, t); };
    ImproperResult res = integrate_to_infinity(integrand, tol, false, 1.0, 1e6);
    ak.value = res.value;
    ak.error = res.error;
    ak.horizon = res.horizon;
    ak.heuristic = res.heuristic;
    switch (res.status) {
      case TailStatus::Converged: ak.state = EntryState::Finite; break;
      case TailStatus::Divergent: ak.state = EntryState::Divergent; break;
      default: ak.state = EntryState::Inconclusive; break;
    }
    if (ak.state != EntryState::Finite) {
      for (int s = k + 1; s < r; ++s)
        out[static_cast<std::size_t>(s)].state = EntryState::NotEvaluated;
      break;
    }
    finite.push_back(ak.value);
  }
  return out;
}

PFamily::PFamily(Weight g, std::vector<double> A, double tol)
    : g_(std::move(g)), A_(std::move(A)) {
  table_ = std::make_shared<MomentTable>(
      g_, std::max<int>(static_cast<int>(A_.size()) - 1, 0), 8.0, tol);
}

double PFamily::eval(int k, double t) const {
  if (k < 0 || k > static_cast<int>(A_.size()))
    throw std::invalid_argument("PFamily: k out of range (needs A_0..A_{k-1})");
  if (t < 0.0) throw std::domain_error("PFamily: t must be nonnegative");
  if (k == 0) return g_(t);
  std::lock_guard<std::mutex> lock(mu_);
  if (t > table_->domain_end()) table_->extend_to(2.0 * t);
  double poly = 0.0;
  double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^{k-s-1} at s = 0
  for (int s = 0; s < k; ++s) {
    poly += sign * A_[static_cast<std::size_t>(s)] *
            std::pow(t, k - s - 1) / factorial(k - s - 1);
    sign = -sign;
  }
  const double gk = primitive_from_moments(*table_, k, t);
  return poly + ((k % 2 == 0) ? gk : -gk);
}

double eval_P(const Weight& g, const std::vector<AEntry>& A, int k, double t) {
  if (k < 1 || k > static_cast<int>(A.size()))
    throw std::invalid_argument("eval_P: k out of range");
  std::vector<double> finite;
  for (int s = 0; s < k; ++s) {
    if (A[static_cast<std::size_t>(s)].state != EntryState::Finite)
      throw std::invalid_argument("eval_P: A_" + std::to_string(s) +
                                  " is not finite");
    finite.push_back(A[static_cast<std::size_t>(s)].value);
  }
  PFamily pf(g, std::move(finite));
  return pf.eval(k, t);
}

SupRatioResult sup_ratio(const std::function<double(double)>& p,
                         const Weight& f, const HorizonPolicy& policy,
                         double abs_noise) {
  SupRatioResult out;
  // restrict to where f is large enough that |p|/f is numerically meaningful
  const double floor = 1e4 * abs_noise;
  double t_end = policy.t_max;
  if (f(policy.t_max) < floor) {
    double lo = 0.0, hi = policy.t_max;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) >= floor ? lo : hi) = mid;
    }
    t_end = lo;
  }
  out.reliable_end = t_end;
  if (t_end <= 0.0) {
    out.state = SupState::Inconclusive;
    out.note = "weight below noise floor everywhere";
    return out;
  }

  const int n = std::max(policy.grid, 64);
  std::vector<double> ts(static_cast<std::size_t>(n)), vs(static_cast<std::size_t>(n));
  int best = 0;
  for (int i = 0; i < n; ++i) {
    const double t = t_end * i / (n - 1);
    ts[static_cast<std::size_t>(i)] = t;
    vs[static_cast<std::size_t>(i)] = std::abs(p(t)) / f(t);
    if (vs[static_cast<std::size_t>(i)] > vs[static_cast<std::size_t>(best)]) best = i;
  }

  // golden-section refinement around the best grid point
  {
    const double gr = 0.6180339887498949;
    double a = ts[static_cast<std::size_t>(std::max(best - 1, 0))];
    double b = ts[static_cast<std::size_t>(std::min(best + 1, n - 1))];
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = std::abs(p(x1)) / f(x1), f2 = std::abs(p(x2)) / f(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + gr * (b - a); f2 = std::abs(p(x2)) / f(x2);
      } else {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - gr * (b - a); f1 = std::abs(p(x1)) / f(x1);
      }
    }
    out.argmax = 0.5 * (a + b);
    out.value = std::max({vs[static_cast<std::size_t>(best)], f1, f2});
  }

  // tail trend over the last quarter of the reliable window
  const int q3 = 3 * n / 4;
  double growth = vs[static_cast<std::size_t>(n - 1)] /
                  std::max(vs[static_cast<std::size_t>(q3)], 1e-300);
  bool rising = true;
  for (int i = n - 6; i < n - 1; ++i)
    if (vs[static_cast<std::size_t>(i + 1)] < vs[static_cast<std::size_t>(i)] * (1.0 - 1e-9))
      rising = false;
  if (growth > 1.05 && rising) {
    out.state = SupState::Divergent;
    out.note = "ratio rising without bound at the reliable horizon";
  } else if (growth > 1.005 && rising && best >= n - 2 &&
             !(f.limit_at_infinity && *f.limit_at_infinity > 0.0)) {
    out.state = SupState::Inconclusive;
    out.note = "ratio mildly rising at the reliable horizon";
  } else {
    out.state = SupState::Finite;
  }
  return out;
}

namespace {

nlohmann::json entry_json(const AEntry& e) {
  switch (e.state) {
    case EntryState::Finite: return e.value;
    case EntryState::Divergent: return "divergent";
    case EntryState::Inconclusive: return "inconclusive";
    default: return "not-evaluated";
  }
}

}  // namespace

std::string FinitenessReport::to_json() const {
  nlohmann::json j;
  j["r"] = r;
  j["A"] = nlohmann::json::array();
  nlohmann::json errors = nlohmann::json::array();
  nlohmann::json horizons = nlohmann::json::array();
  for (const auto& e : A) {
    j["A"].push_back(entry_json(e));
    errors.push_back(e.error);
    horizons.push_back(e.horizon);
  }
  j["K_r"] = entry_json(K_r);
  switch (classification) {
    case Finiteness::Finite: j["classification"] = "FINITE"; break;
    case Finiteness::Infinite: j["classification"] = "INFINITE"; break;
    default: j["classification"] = "INCONCLUSIVE"; break;
  }
  j["diagnostics"] = {{"errors", errors},
                      {"horizons", horizons},
                      {"f_limit", f_limit_hint},
                      {"note", diagnostics}};
  return j.dump(2);
}

FinitenessReport classify_finiteness(const Weight& f, const Weight& g, int r,
                                     double tol) {
  if (r < 1) throw std::invalid_argument("classify_finiteness: r >= 1");
  FinitenessReport rep;
  rep.r = r;
  rep.A = compute_A(g, r, tol);
  rep.f_limit_hint = f.limit_at_infinity.value_or(f(1e3));

  bool all_finite = true;
  bool inconclusive = false;
  for (const auto& e : rep.A) {
    if (e.state == EntryState::Divergent) { all_finite = false; break; }
    if (e.state == EntryState::Inconclusive) {
      all_finite = false;
      inconclusive = true;
      break;
    }
    if (e.state == EntryState::NotEvaluated) { all_finite = false; break; }
  }
  if (!all_finite) {
    rep.K_r.state = EntryState::NotEvaluated;
    rep.classification =
        inconclusive ? Finiteness::Inconclusive : Finiteness::Infinite;
    rep.diagnostics = inconclusive ? "tail integral inconclusive"
                                   : "some A_k diverges";
    return rep;
  }

  std::vector<double> finite;
  for (const auto& e : rep.A) finite.push_back(e.value);
  auto pf = std::make_shared<PFamily>(g, finite, 0.1 * tol);
  SupRatioResult K =
      sup_ratio([pf, r](double t) { return pf->eval(r, t); }, f, {}, tol);
  rep.K_r.value = K.value;
  switch (K.state) {
    case SupState::Finite:
      rep.K_r.state = EntryState::Finite;
      rep.classification = Finiteness::Finite;
      break;
    case SupState::Divergent:
      rep.K_r.state = EntryState::Divergent;
      rep.classification = Finiteness::Infinite;
      break;
    default:
      rep.K_r.state = EntryState::Inconclusive;
      rep.classification = Finiteness::Inconclusive;
      break;
  }
  rep.diagnostics = K.note.empty() ? "ok" : K.note;
  return rep;
}

}  // namespace gsp
