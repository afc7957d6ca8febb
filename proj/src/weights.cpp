#include "gsp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace gsp {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

double require_param(const WeightPreset& p, const char* what) {
  if (p.params.size() != 1)
    throw WeightParameterError(p.name + " expects one parameter (" + what +
                               ")");
  return p.params[0];
}

}  // namespace

Weight make_weight(const WeightPreset& preset) {
  Weight w;
  if (preset.name == "const") {
    const double c = require_param(preset, "c");
    if (!(c > 0.0)) throw WeightParameterError("const: c must be positive");
    w.eval = [c](double) { return c; };
    w.kind = "const:" + std::to_string(c);
    w.limit_at_infinity = c;
    w.tail = {TailClass::Constant, 0.0, c, "constant"};
  } else if (preset.name == "exp") {
    const double lambda = require_param(preset, "lambda");
    if (!(lambda > 0.0))
      throw WeightParameterError("exp: lambda must be positive");
    w.eval = [lambda](double t) { return std::exp(-lambda * t); };
    w.kind = "exp:" + std::to_string(lambda);
    w.limit_at_infinity = 0.0;
    w.tail = {TailClass::Exponential, lambda, 0.0, "exp(-lambda t)"};
  } else if (preset.name == "pow") {
    const double p = require_param(preset, "p");
    if (!(p > 0.0)) throw WeightParameterError("pow: p must be positive");
    w.eval = [p](double t) { return std::pow(1.0 + t, -p); };
    w.kind = "pow:" + std::to_string(p);
    w.limit_at_infinity = 0.0;
    w.tail = {TailClass::Power, p, 0.0, "(1+t)^-p"};
  } else if (preset.name == "gauss-paper-f") {
    if (!preset.params.empty())
      throw WeightParameterError("gauss-paper-f takes no parameters");
    w.eval = [](double t) {
      const double u = t + kSqrt3;
      return std::exp(-0.5 * u * u);
    };
    w.kind = "gauss-paper-f";
    w.limit_at_infinity = 0.0;
    w.tail = {TailClass::GaussianLike, 0.0, 0.0, "exp(-(t+sqrt3)^2/2)"};
  } else if (preset.name == "gauss-paper-g") {
    if (!preset.params.empty())
      throw WeightParameterError("gauss-paper-g takes no parameters");
    w.eval = [](double t) {
      const double u = t + kSqrt3;
      return (u * u - 1.0) * std::exp(-0.5 * u * u);
    };
    w.kind = "gauss-paper-g";
    w.limit_at_infinity = 0.0;
    w.tail = {TailClass::GaussianLike, 0.0, 0.0,
              "(-1+(t+sqrt3)^2) exp(-(t+sqrt3)^2/2)"};
  } else {
    throw WeightParameterError("unknown weight preset: " + preset.name);
  }
  return w;
}

Weight parse_weight(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (name == "gauss-paper-f" || name == "gauss-paper-g")
    return make_weight({name, {}});
  if (colon == std::string::npos)
    throw WeightParameterError("weight spec needs a parameter: " + spec);
  const std::string arg = spec.substr(colon + 1);
  if (name == "table") return load_table_weight(arg);
  if (name == "const" || name == "exp" || name == "pow") {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &pos);
    } catch (const std::exception&) {
      throw WeightParameterError("bad numeric parameter in: " + spec);
    }
    if (pos != arg.size())
      throw WeightParameterError("bad numeric parameter in: " + spec);
    return make_weight({name, {v}});
  }
  throw WeightParameterError("unknown weight spec: " + spec);
}

Weight load_table_weight(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw WeightFormatError("cannot open weight table: " + path);

  auto ts = std::make_shared<std::vector<double>>();
  auto vs = std::make_shared<std::vector<double>>();
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (auto& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    double t, v;
    if (!(ss >> t)) continue;  // blank/comment line
    if (!(ss >> v))
      throw WeightFormatError("row " + std::to_string(row) +
                              ": expected two numeric columns");
    std::string rest;
    if (ss >> rest)
      throw WeightFormatError("row " + std::to_string(row) +
                              ": trailing content");
    if (!ts->empty() && t <= ts->back())
      throw WeightFormatError("row " + std::to_string(row) +
                              ": t grid must be strictly increasing");
    if (!(v > 0.0))
      throw WeightFormatError("row " + std::to_string(row) +
                              ": values must be positive");
    if (!vs->empty() && v > vs->back())
      throw WeightFormatError("row " + std::to_string(row) +
                              ": values must be non-increasing");
    ts->push_back(t);
    vs->push_back(v);
  }
  if (ts->size() < 2)
    throw WeightFormatError("weight table needs at least two rows");
  if (ts->front() != 0.0)
    throw WeightFormatError("weight table must start at t = 0");

  Weight w;
  w.eval = [ts, vs](double t) {
    if (t <= ts->front()) return vs->front();
    if (t >= ts->back()) return vs->back();  // constant extension
    auto it = std::upper_bound(ts->begin(), ts->end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts->begin()) - 1;
    const double u = (t - (*ts)[i]) / ((*ts)[i + 1] - (*ts)[i]);
    return (1.0 - u) * (*vs)[i] + u * (*vs)[i + 1];
  };
  w.kind = "table:" + path;
  w.limit_at_infinity = vs->back();
  w.tail = {TailClass::Constant, 0.0, vs->back(),
            "constant extension beyond t = " + std::to_string(ts->back())};
  return w;
}

WeightValidation validate_weight(const Weight& w, double horizon,
                                 int samples) {
  WeightValidation rep;
  if (!(horizon > 0.0) || samples < 2) {
    rep.positive = rep.nonincreasing = false;
    rep.message = "horizon must be positive and samples >= 2";
    return rep;
  }
  constexpr double kRelTol = 1e-12;
  double prev = w(0.0);
  if (!(prev > 0.0)) {
    rep.positive = false;
    rep.offending_t = 0.0;
    rep.message = "weight not positive at t = 0";
    return rep;
  }
  for (int i = 1; i < samples; ++i) {
    const double t = horizon * static_cast<double>(i) / (samples - 1);
    const double v = w(t);
    if (!(v > 0.0)) {
      rep.positive = false;
      rep.offending_t = t;
      rep.message = "weight not positive at t = " + std::to_string(t);
      return rep;
    }
    if (v > prev * (1.0 + kRelTol)) {
      rep.nonincreasing = false;
      rep.offending_t = t;
      rep.message = "weight increases at t = " + std::to_string(t);
      return rep;
    }
    prev = v;
  }
  if (w.limit_at_infinity && *w.limit_at_infinity > prev * (1.0 + 1e-9)) {
    rep.nonincreasing = false;
    rep.offending_t = horizon;
    rep.message = "declared limit at infinity exceeds sampled values";
  }
  return rep;
}

}  // namespace gsp
