#include "cvmshift/model.hpp"

#include <cmath>

#include "cvmshift/errors.hpp"

namespace cvmshift {

namespace {

double param_or(const std::map<std::string, double>& params,
                const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> known,
                    const std::string& family) {
  for (const auto& [key, value] : params) {
    (void)value;
    bool ok = key == "alpha" || key == "beta";
    for (const char* k : known) ok = ok || key == k;
    if (!ok) {
      throw ConfigError("unknown parameter '" + key + "' for model family '" +
                        family + "'");
    }
  }
}

}  // namespace

ShiftDriftModel make_model(const std::string& name,
                           const std::map<std::string, double>& params) {
  ShiftDriftModel m;
  m.name = name;
  m.params = params;
  m.theta_interval.alpha = param_or(params, "alpha", -5.0);
  m.theta_interval.beta = param_or(params, "beta", 5.0);

  if (name == "ou") {
    reject_unknown(params, {"rate"}, name);
    const double rate = param_or(params, "rate", 1.0);
    if (!(rate > 0.0)) throw ConfigError("ou: rate must be positive");
    m.drift_star = [rate](double x) { return -rate * x; };
    m.drift_star_deriv = [rate](double) { return -rate; };
  } else if (name == "cubic") {
    reject_unknown(params, {}, name);
    m.drift_star = [](double x) { return -x * x * x; };
    m.drift_star_deriv = [](double x) { return -3.0 * x * x; };
  } else if (name == "tanh-damped") {
    reject_unknown(params, {"a", "b"}, name);
    const double a = param_or(params, "a", 1.0);
    const double b = param_or(params, "b", 0.1);
    if (!(a > 0.0) || !(b >= 0.0)) {
      throw ConfigError("tanh-damped: need a > 0 and b >= 0");
    }
    m.drift_star = [a, b](double x) { return -a * std::tanh(x) - b * x; };
    m.drift_star_deriv = [a, b](double x) {
      const double c = std::cosh(x);
      return -a / (c * c) - b;
    };
  } else {
    throw ConfigError("unknown model family '" + name + "'");
  }

  validate_model(m);
  return m;
}

std::vector<std::string> model_names() { return {"ou", "cubic", "tanh-damped"}; }

bool derivative_consistent(const ShiftDriftModel& model, double probe_half,
                           std::size_t points, double fd_step,
                           double rel_tol) {
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -probe_half + 2.0 * probe_half * static_cast<double>(i) /
                                       static_cast<double>(points - 1);
    const double fd =
        (model.drift_star(x + fd_step) - model.drift_star(x - fd_step)) /
        (2.0 * fd_step);
    const double d = model.drift_star_deriv(x);
    const double scale = std::max({std::abs(d), std::abs(fd), 1.0});
    if (std::abs(fd - d) > rel_tol * scale) return false;
  }
  return true;
}

void validate_model(const ShiftDriftModel& model) {
  if (!model.drift_star || !model.drift_star_deriv) {
    throw ConfigError("model '" + model.name + "': drift callables not set");
  }
  if (!(model.theta_interval.alpha < 0.0 && 0.0 < model.theta_interval.beta)) {
    throw ConfigError("model '" + model.name +
                      "': theta interval must satisfy alpha < 0 < beta");
  }
  if (!derivative_consistent(model)) {
    throw ConditionError("model '" + model.name +
                         "': drift derivative disagrees with finite "
                         "differences on the probe grid");
  }
}

}  // namespace cvmshift
