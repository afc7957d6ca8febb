#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "gsp/quadrature.hpp"
#include "gsp/weights.hpp"

namespace gsp {

/// Cumulative moments M_j(t) = int_0^t s^j w(s) ds, j = 0..max_j, on [0, T].
/// Cells are refined until each panel's Gauss-Kronrod error estimate is below
/// its share of `tol`; evaluation completes the partial cell with one panel.
class MomentTable {
 public:
  MomentTable(Weight w, int max_j, double T, double tol);

  void moments_at(double t, std::span<double> out) const;
  double moment(int j, double t) const;

  /// Appends cells so the table covers [0, T2].  Not thread-safe.
  void extend_to(double T2);

  double domain_end() const { return grid_.back(); }
  int max_order() const { return max_j_; }
  const Weight& weight() const { return w_; }
  double tol() const { return tol_; }

 private:
  void append_range(double from, double to);
  void append_cell(double a, double b, int depth);

  Weight w_;
  int max_j_;
  double tol_;
  double density_ = 0.0;
  std::vector<double> grid_;              // cell edges, grid_[0] == 0
  std::vector<std::vector<double>> cum_;  // cum_[j][i] = M_j(grid_[i])
};

/// Iterated primitive g_k of the weight g: g_0 = g, g_k(t) = int_0^t g_{k-1}.
class PrimitiveTable {
 public:
  PrimitiveTable(int k, std::shared_ptr<const MomentTable> table);

  double operator()(double t) const;
  int order() const { return k_; }
  double domain_end() const { return table_->domain_end(); }

 private:
  int k_;
  std::shared_ptr<const MomentTable> table_;
};

PrimitiveTable build_primitive_table(const Weight& g, int k, double T,
                                     double tol);

enum class EntryState { Finite, Divergent, NotEvaluated, Inconclusive };

struct AEntry {
  EntryState state = EntryState::NotEvaluated;
  double value = 0.0;
  double error = 0.0;
  double horizon = 0.0;
  bool heuristic = false;
};

/// Tail constants A_0 .. A_{r-1}; once an entry diverges the rest are
/// NotEvaluated.
std::vector<AEntry> compute_A(const Weight& g, int r, double tol = 1e-10);

/// The bounded iterated primitives P_k (P_0 := g).  Thread-safe lazy
/// extension of the underlying moment table.
class PFamily {
 public:
  PFamily(Weight g, std::vector<double> A, double tol = 1e-10);

  /// P_k(t) for 0 <= k <= A.size().
  double eval(int k, double t) const;
  int max_k() const { return static_cast<int>(A_.size()); }
  const std::vector<double>& A() const { return A_; }

 private:
  Weight g_;
  std::vector<double> A_;
  mutable std::mutex mu_;
  mutable std::shared_ptr<MomentTable> table_;
};

/// One-shot P_k(t); prefer PFamily for repeated evaluation.
double eval_P(const Weight& g, const std::vector<AEntry>& A, int k, double t);

enum class SupState { Finite, Divergent, Inconclusive };

struct HorizonPolicy {
  double t_max = 1e3;
  int grid = 10'000;
};

struct SupRatioResult {
  SupState state = SupState::Inconclusive;
  double value = 0.0;
  double argmax = 0.0;
  double reliable_end = 0.0;  // end of the numerically reliable window
  std::string note;
};

/// K_r = sup_{t >= 0} |p(t)| / f(t) by grid search plus golden-section
/// refinement, with a tail-trend check on the reliable window.
SupRatioResult sup_ratio(const std::function<double(double)>& p,
                         const Weight& f, const HorizonPolicy& policy = {},
                         double abs_noise = 1e-10);

enum class Finiteness { Finite, Infinite, Inconclusive };

struct FinitenessReport {
  int r = 0;
  std::vector<AEntry> A;
  AEntry K_r;
  Finiteness classification = Finiteness::Inconclusive;
  double f_limit_hint = 0.0;
  std::string diagnostics;

  std::string to_json() const;
};

FinitenessReport classify_finiteness(const Weight& f, const Weight& g, int r,
                                     double tol = 1e-10);

}  // namespace gsp
