#include "gsp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace gsp {

namespace {

// QUADPACK 7-15 Gauss-Kronrod pair (positive half nodes, descending).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277,
                           0.381830050505119, 0.417959183673469};

}  // namespace

QuadResult gk15(const std::function<double(double)>& fn, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = fn(c - h * kXgk[i]);
    fv[14 - i] = fn(c + h * kXgk[i]);
  }
  fv[7] = fn(c);
  double k15 = kWgk[7] * fv[7];
  double g7 = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    k15 += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) g7 += kWg[i / 2] * (fv[i] + fv[14 - i]);
  }
  QuadResult r;
  r.value = k15 * h;
  r.error = std::abs((k15 - g7) * h);
  r.evals = 15;
  return r;
}

void gk15_moments(const std::function<double(double)>& w, double a, double b,
                  double* values, double* errors, int count) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double node[15], fw[15];
  for (int i = 0; i < 7; ++i) {
    node[i] = c - h * kXgk[i];
    node[14 - i] = c + h * kXgk[i];
  }
  node[7] = c;
  for (int i = 0; i < 15; ++i) fw[i] = w(node[i]);
  for (int j = 0; j < count; ++j) {
    double k15 = 0.0, g7 = 0.0;
    for (int i = 0; i < 15; ++i) {
      const double v = fw[i] * std::pow(node[i], j);
      const int half = i < 8 ? i : 14 - i;
      k15 += kWgk[half] * v;
      if (half % 2 == 1) g7 += kWg[half / 2] * v;
    }
    values[j] = k15 * h;
    errors[j] = std::abs((k15 - g7) * h);
  }
}

QuadResult integrate(const std::function<double(double)>& fn, double a,
                     double b, double abs_tol, std::size_t max_evals) {
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  QuadResult whole = gk15(fn, a, b);
  std::priority_queue<Panel> heap;
  heap.push({a, b, whole.value, whole.error});
  double total_value = whole.value;
  double total_error = whole.error;
  std::size_t evals = whole.evals;

  while (total_error > abs_tol && !heap.empty()) {
    if (evals + 30 > max_evals)
      throw QuadratureBudgetError(total_error, abs_tol);
    Panel p = heap.top();
    heap.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (mid <= p.a || mid >= p.b) {
      // interval at machine resolution; keep its contribution as-is
      total_error -= p.error;
      continue;
    }
    QuadResult left = gk15(fn, p.a, mid);
    QuadResult right = gk15(fn, mid, p.b);
    evals += 30;
    total_value += left.value + right.value - p.value;
    total_error += left.error + right.error - p.error;
    heap.push({p.a, mid, left.value, left.error});
    heap.push({mid, p.b, right.value, right.error});
  }
  return {total_value, total_error, evals};
}

ImproperResult integrate_to_infinity(const std::function<double(double)>& fn,
                                     double abs_tol, bool certified_decay,
                                     double initial_horizon,
                                     double max_horizon,
                                     std::size_t max_evals) {
  ImproperResult out;
  double T = initial_horizon;
  QuadResult head = integrate(fn, 0.0, T, 0.25 * abs_tol, max_evals);
  out.value = head.value;
  out.error = head.error;
  out.horizon = T;
  std::size_t evals = head.evals;

  std::vector<double> increments;
  int sub_tol_streak = 0;
  while (T < max_horizon) {
    std::size_t budget_left =
        max_evals > evals ? max_evals - evals : std::size_t{0};
    if (budget_left < 10'000) break;
    QuadResult inc;
    try {
      inc = integrate(fn, T, 2.0 * T, 0.25 * abs_tol, budget_left);
    } catch (const QuadratureBudgetError&) {
      break;
    }
    evals += inc.evals;
    out.value += inc.value;
    out.error += inc.error;
    T *= 2.0;
    out.horizon = T;
    const double mag = std::abs(inc.value);
    increments.push_back(mag);

    if (mag < abs_tol)
      ++sub_tol_streak;
    else
      sub_tol_streak = 0;

    const bool integrand_decaying =
        std::abs(fn(T)) <= std::abs(fn(0.5 * T)) + abs_tol;

    if (certified_decay && sub_tol_streak >= 1) {
      out.status = TailStatus::Converged;
      return out;
    }
    if (!certified_decay && sub_tol_streak >= 3 && integrand_decaying) {
      out.status = TailStatus::Converged;
      out.heuristic = true;
      return out;
    }
    // geometric tail: I_{j+1}/I_j stably below 0.6 -> extrapolate remainder
    const std::size_t m = increments.size();
    if (!certified_decay && m >= 4 && mag > 0.0) {
      bool geometric = true;
      double rho = 0.0;
      for (std::size_t j = m - 3; j < m; ++j) {
        if (increments[j - 1] <= 0.0) { geometric = false; break; }
        double q = increments[j] / increments[j - 1];
        if (q > 0.6) { geometric = false; break; }
        rho = std::max(rho, q);
      }
      if (geometric) {
        const double tail = mag * rho / (1.0 - rho);
        if (tail < abs_tol && integrand_decaying) {
          out.value += tail;
          out.error += tail;
          out.status = TailStatus::Converged;
          out.heuristic = true;
          return out;
        }
      }
    }
    // increments not shrinking over several doublings: divergent
    if (m >= 4 && mag > abs_tol &&
        increments[m - 1] >= 0.9 * increments[m - 2] &&
        increments[m - 2] >= 0.9 * increments[m - 3]) {
      out.status = TailStatus::Divergent;
      return out;
    }
  }
  // horizon or budget exhausted
  if (increments.size() >= 2 && increments.back() > abs_tol &&
      increments.back() >= 0.9 * increments[increments.size() - 2])
    out.status = TailStatus::Divergent;
  else
    out.status = TailStatus::Inconclusive;
  return out;
}

}  // namespace gsp
