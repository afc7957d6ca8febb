#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsp {

enum class TailClass { Constant, Exponential, Power, GaussianLike, Unknown };

/// Analytic statement about a weight's decay as t -> inf.
struct TailDescriptor {
  TailClass cls = TailClass::Unknown;
  double rate = 0.0;   // lambda for Exponential, exponent p for Power
  double level = 0.0;  // limiting value for Constant
  std::string note;

  bool integrable() const {
    switch (cls) {
      case TailClass::Exponential:
      case TailClass::GaussianLike:
        return true;
      case TailClass::Power:
        return rate > 1.0;
      case TailClass::Constant:
        return level == 0.0;
      default:
        return false;
    }
  }
};

/// Positive non-increasing weight on [0, inf).
struct Weight {
  std::function<double(double)> eval;
  std::string kind;  // preset spec string, e.g. "exp:1" or "table:path"
  std::optional<double> limit_at_infinity;
  TailDescriptor tail;

  double operator()(double t) const { return eval(t); }
};

struct WeightPreset {
  std::string name;            // const | exp | pow | gauss-paper-f | gauss-paper-g
  std::vector<double> params;  // c / lambda / p as applicable
};

class WeightParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class WeightFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Weight make_weight(const WeightPreset& preset);

/// Parses the CLI weight syntax: const:c, exp:lambda, pow:p,
/// gauss-paper-f, gauss-paper-g, table:path.
Weight parse_weight(const std::string& spec);

/// Two-column (t, value) table, t strictly increasing from 0; piecewise
/// linear with a declared constant tail beyond the last row.
Weight load_table_weight(const std::string& path);

struct WeightValidation {
  bool positive = true;
  bool nonincreasing = true;
  std::optional<double> offending_t;
  std::string message;

  bool pass() const { return positive && nonincreasing; }
};

WeightValidation validate_weight(const Weight& w, double horizon, int samples);

}  // namespace gsp
