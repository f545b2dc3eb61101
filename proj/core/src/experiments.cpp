#include "cvmshift/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "cvmshift/errors.hpp"
#include "cvmshift/estimators.hpp"
#include "cvmshift/io.hpp"
#include "cvmshift/parallel.hpp"
#include "cvmshift/rng.hpp"
#include "cvmshift/simulate.hpp"

namespace fs = std::filesystem;

namespace cvmshift {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Comma split that respects parentheses, so tanh(1,0.1) stays one token.
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (const char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      const auto t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  const auto t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) out.push_back(parse_double(tok));
  return out;
}

std::string sanitize_label(std::string label) {
  for (auto& c : label) {
    if (c == ',') c = '+';
  }
  return label;
}

std::string format_params(const std::map<std::string, double>& params) {
  std::string out;
  for (const auto& [k, v] : params) out += k + ":" + format_double(v) + ";";
  return out;
}

// ---------------------------------------------------------------------------
// Study execution
// ---------------------------------------------------------------------------

struct Scenario {
  std::string label;
  double T = 0.0;
  std::uint64_t base_seed = 0;
  std::function<Path(std::uint64_t)> make_path;  // seed -> path
  std::string fingerprint;                       // cache invalidation key
};

struct ScenarioRaw {
  // values[k][r], theta[k][r] indexed like `kinds`.
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> theta;
};

bool needs_mle(StatKind k) {
  return k == StatKind::delta_lte || k == StatKind::delta_edf ||
         k == StatKind::ks_lte || k == StatKind::ks_edf;
}

ScenarioRaw compute_scenario(const Scenario& scenario,
                             const std::vector<StatKind>& kinds,
                             std::size_t reps, const ShiftDriftModel& model,
                             const InvariantLaw& law, std::size_t threads) {
  ScenarioRaw raw;
  raw.values.assign(kinds.size(), std::vector<double>(reps, 0.0));
  raw.theta.assign(kinds.size(), std::vector<double>(reps, 0.0));
  const bool want_mle = std::any_of(kinds.begin(), kinds.end(), needs_mle);
  const bool want_mde = std::any_of(kinds.begin(), kinds.end(), [](StatKind k) {
    return k == StatKind::mu_kernel;
  });
  const auto nodes = law.grid_nodes();

  parallel_for(reps, threads, [&](std::size_t r) {
    const Path path = scenario.make_path(derive_seed(scenario.base_seed, r));
    const double T = path.duration();
    double theta_mle = 0.0, theta_mde = 0.0;
    if (want_mle) theta_mle = mle_shift(path, model).theta_hat;
    if (want_mde) theta_mde = mde_shift(path, model, law).theta_hat;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      const StatKind kind = kinds[k];
      CurveEstimate curve;
      double theta = theta_mle;
      switch (kind) {
        case StatKind::delta_lte:
        case StatKind::ks_lte:
          curve = lte_density(path, nodes);
          break;
        case StatKind::delta_edf:
        case StatKind::ks_edf:
          curve = edf(path, nodes);
          break;
        case StatKind::mu_kernel:
          curve = kernel_density(path, nodes);
          theta = theta_mde;
          break;
      }
      const auto report = statistic_from_curve(kind, curve, theta, law, T);
      raw.values[k][r] = report.value;
      raw.theta[k][r] = theta;
    }
  });
  return raw;
}

std::string cache_file_for(const std::string& out_dir,
                           const std::string& study,
                           std::size_t scenario_index) {
  return out_dir + "/cache/" + study + "_s" +
         std::to_string(scenario_index) + ".csv";
}

std::uint32_t fingerprint_crc(const std::string& text) {
  // FNV-1a, enough to invalidate caches on config changes.
  std::uint32_t h = 2166136261u;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

bool load_scenario_cache(const std::string& file,
                         const std::string& fingerprint,
                         const std::vector<StatKind>& kinds, std::size_t reps,
                         ScenarioRaw* raw) {
  std::ifstream in(file);
  if (!in) return false;
  std::string line;
  if (!std::getline(in, line)) return false;
  std::ostringstream want;
  want << "# fingerprint=" << std::hex << fingerprint_crc(fingerprint);
  if (line != want.str()) return false;
  if (!std::getline(in, line) || line != "kind,replicate,value,theta_hat") {
    return false;
  }
  raw->values.assign(kinds.size(), std::vector<double>(reps, 0.0));
  raw->theta.assign(kinds.size(), std::vector<double>(reps, 0.0));
  std::vector<std::size_t> seen(kinds.size(), 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kind_s, rep_s, value_s, theta_s;
    if (!std::getline(ss, kind_s, ',') || !std::getline(ss, rep_s, ',') ||
        !std::getline(ss, value_s, ',') || !std::getline(ss, theta_s)) {
      return false;
    }
    std::size_t k = kinds.size();
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (to_string(kinds[i]) == kind_s) {
        k = i;
        break;
      }
    }
    if (k == kinds.size()) return false;
    std::size_t r = 0;
    try {
      r = static_cast<std::size_t>(std::stoull(rep_s));
      if (r >= reps) return false;
      raw->values[k][r] = parse_double(value_s);
      raw->theta[k][r] = parse_double(theta_s);
    } catch (...) {
      return false;
    }
    ++seen[k];
  }
  for (const auto c : seen) {
    if (c != reps) return false;
  }
  return true;
}

void save_scenario_cache(const std::string& file,
                         const std::string& fingerprint,
                         const std::vector<StatKind>& kinds,
                         const ScenarioRaw& raw) {
  fs::create_directories(fs::path(file).parent_path());
  std::ostringstream out;
  out << "# fingerprint=" << std::hex << fingerprint_crc(fingerprint) << "\n";
  out << "kind,replicate,value,theta_hat\n";
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    for (std::size_t r = 0; r < raw.values[k].size(); ++r) {
      out << to_string(kinds[k]) << "," << r << ","
          << format_double(raw.values[k][r]) << ","
          << format_double(raw.theta[k][r]) << "\n";
    }
  }
  const std::string tmp = file + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw ConfigError("cannot write cache file '" + tmp + "'");
    f << out.str();
  }
  fs::rename(tmp, file);
}

// Tables for every requested CvM kind; simulates and saves missing files.
std::map<LimitKind, QuantileTable> ensure_tables(
    const ExperimentConfig& config, const InvariantLaw& law) {
  std::map<LimitKind, QuantileTable> tables;
  std::size_t kind_index = 0;
  for (const StatKind stat : config.statistics) {
    const LimitKind kind = table_kind_for(stat);  // throws for KS kinds
    if (tables.count(kind) != 0) continue;
    const auto it = config.tables.find(kind);
    if (it == config.tables.end()) {
      throw ConfigError("no table file configured for kind '" +
                        to_string(kind) + "'");
    }
    if (fs::exists(it->second)) {
      tables.emplace(kind, load_table(it->second));
    } else {
      // Standard grid of levels, extended by whatever the study asks for.
      std::vector<double> eps = {0.01, 0.02, 0.05, 0.10};
      eps.insert(eps.end(), config.epsilons.begin(), config.epsilons.end());
      const auto batch = simulate_limit(
          kind, law, config.limits_n_mc,
          derive_seed(config.limits_seed, kind_index), nullptr,
          config.threads);
      auto table = estimate_quantiles(batch, eps);
      fs::create_directories(fs::path(it->second).parent_path().empty()
                                 ? fs::path(".")
                                 : fs::path(it->second).parent_path());
      save_table(table, it->second);
      tables.emplace(kind, std::move(table));
    }
    const auto& table = tables.at(kind);
    if (table.model_ref != law.model_ref()) {
      throw ConfigError("table '" + it->second + "' was simulated for '" +
                        table.model_ref + "', study model is '" +
                        law.model_ref() + "'");
    }
    ++kind_index;
  }
  return tables;
}

StudyReport run_study(const ExperimentConfig& config,
                      const std::string& study_name,
                      const std::vector<Scenario>& scenarios,
                      const ShiftDriftModel& model, const InvariantLaw& law) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tables = ensure_tables(config, law);
  const std::size_t threads = resolve_threads(config.threads);

  StudyReport report;
  report.threads_used = threads;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& scenario = scenarios[s];
    const std::string cache = cache_file_for(config.out_dir, study_name, s);
    ScenarioRaw raw;
    if (!load_scenario_cache(cache, scenario.fingerprint, config.statistics,
                             config.replications, &raw)) {
      raw = compute_scenario(scenario, config.statistics, config.replications,
                             model, law, threads);
      save_scenario_cache(cache, scenario.fingerprint, config.statistics, raw);
    }
    for (std::size_t k = 0; k < config.statistics.size(); ++k) {
      ScenarioResult res;
      res.scenario = scenario.label;
      res.kind = config.statistics[k];
      res.replications = config.replications;
      res.values = raw.values[k];
      res.theta_hats = raw.theta[k];
      const auto& table = tables.at(table_kind_for(res.kind));
      for (const double eps : config.epsilons) {
        const double thr = table.threshold_for(eps);
        std::size_t rejections = 0;
        for (const double v : res.values) {
          if (v > thr) ++rejections;
        }
        res.rates.push_back(
            rejection_rate(eps, rejections, config.replications));
      }
      report.scenarios.push_back(std::move(res));
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_study_csv(report, config.out_dir, study_name);
  return report;
}

std::string scenario_fingerprint(const ExperimentConfig& config,
                                 const std::string& study,
                                 const std::string& label, double T,
                                 std::uint64_t base_seed) {
  std::string fp = study + "|model=" + config.model_name + "|" +
                   format_params(config.model_params) + "|" + label +
                   "|T=" + format_double(T) +
                   "|dt=" + format_double(config.dt) +
                   "|reps=" + std::to_string(config.replications) +
                   "|seed=" + std::to_string(base_seed) + "|stats=";
  for (const auto k : config.statistics) fp += to_string(k) + "+";
  return fp;
}

}  // namespace

AlternativeSpec parse_alternative(const std::string& token) {
  const auto open = token.find('(');
  const auto close = token.rfind(')');
  if (open == std::string::npos || close != token.size() - 1 ||
      close <= open) {
    throw ConfigError("malformed alternative drift '" + token +
                      "'; expected name(args)");
  }
  const std::string name = trim(token.substr(0, open));
  const auto args = parse_double_list(token.substr(open + 1, close - open - 1));

  AlternativeSpec spec;
  spec.label = name + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    spec.label += (i ? "," : "") + format_double(args[i]);
  }
  spec.label += ")";

  if (name == "linear" && args.size() == 1) {
    const double c = args[0];
    spec.drift = [c](double x) { return -c * x; };
  } else if (name == "cubic" && args.size() == 1) {
    const double c = args[0];
    spec.drift = [c](double x) { return -c * x * x * x; };
  } else if (name == "tanh" && args.size() == 2) {
    const double a = args[0], b = args[1];
    spec.drift = [a, b](double x) { return -a * std::tanh(x) - b * x; };
  } else {
    throw ConfigError("unknown alternative drift '" + token +
                      "'; supported: linear(c), cubic(c), tanh(a,b)");
  }
  return spec;
}

ExperimentConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");

  ExperimentConfig config;
  config.statistics.clear();
  config.theta0s.clear();
  config.epsilons.clear();

  std::string section;
  std::string line;
  std::size_t lineno = 0;
  bool saw_statistics = false, saw_theta0 = false, saw_eps = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError(file + ":" + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = t.substr(1, t.size() - 2);
      if (section != "model" && section != "study" &&
          section != "alternatives" && section != "tables" &&
          section != "limits" && section != "output") {
        throw ConfigError(file + ":" + std::to_string(lineno) +
                          ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(file + ":" + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    auto bad_key = [&]() {
      return ConfigError(file + ":" + std::to_string(lineno) +
                         ": unknown key '" + key + "' in section [" + section +
                         "]");
    };

    if (section == "model") {
      if (key == "name") {
        config.model_name = value;
      } else {
        config.model_params[key] = parse_double(value);
      }
    } else if (section == "study") {
      if (key == "T") {
        config.T = parse_double(value);
      } else if (key == "dt") {
        config.dt = parse_double(value);
      } else if (key == "replications") {
        config.replications = static_cast<std::size_t>(parse_double(value));
      } else if (key == "theta0") {
        config.theta0s = parse_double_list(value);
        saw_theta0 = true;
      } else if (key == "epsilons") {
        config.epsilons = parse_double_list(value);
        saw_eps = true;
      } else if (key == "statistics") {
        for (const auto& tok : split_list(value)) {
          config.statistics.push_back(stat_kind_from_string(tok));
        }
        saw_statistics = true;
      } else if (key == "seed") {
        config.seed = static_cast<std::uint64_t>(parse_double(value));
      } else if (key == "threads") {
        config.threads = static_cast<std::size_t>(parse_double(value));
      } else {
        throw bad_key();
      }
    } else if (section == "alternatives") {
      if (key == "drifts") {
        for (const auto& tok : split_list(value)) {
          config.alternatives.push_back(parse_alternative(tok));
        }
      } else if (key == "T_list") {
        config.T_list = parse_double_list(value);
      } else {
        throw bad_key();
      }
    } else if (section == "tables") {
      if (key == "delta" || key == "Delta" || key == "mu") {
        config.tables[limit_kind_from_string(key)] = value;
      } else {
        throw bad_key();
      }
    } else if (section == "limits") {
      if (key == "n_mc") {
        config.limits_n_mc = static_cast<std::size_t>(parse_double(value));
      } else if (key == "seed") {
        config.limits_seed = static_cast<std::uint64_t>(parse_double(value));
      } else {
        throw bad_key();
      }
    } else if (section == "output") {
      if (key == "dir") {
        config.out_dir = value;
      } else {
        throw bad_key();
      }
    } else {
      throw ConfigError(file + ":" + std::to_string(lineno) +
                        ": key outside any section");
    }
  }

  if (!saw_statistics) {
    config.statistics = {StatKind::delta_lte, StatKind::delta_edf};
  }
  if (!saw_theta0) config.theta0s = {0.0};
  if (!saw_eps) config.epsilons = {0.05};
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (!(config.dt > 0.0) || !(config.T >= 10.0 * config.dt)) {
    throw ConfigError("need dt > 0 and T >= 10*dt");
  }
  for (const double e : config.epsilons) {
    if (!(e > 0.0 && e < 1.0)) throw ConfigError("epsilons must be in (0,1)");
  }
  return config;
}

RateEntry rejection_rate(double epsilon, std::size_t rejections,
                         std::size_t n) {
  RateEntry entry;
  entry.epsilon = epsilon;
  entry.rejections = rejections;
  const double nd = static_cast<double>(n);
  entry.rate = static_cast<double>(rejections) / nd;
  double p = entry.rate;
  if (rejections == 0 || rejections == n) {
    // continuity guard: move half a count inward for the width estimate
    p = (static_cast<double>(rejections) + 0.5) / (nd + 1.0);
    if (rejections == n) p = (nd - 0.5) / (nd + 1.0);
  }
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / nd);
  entry.ci_lo = std::max(0.0, entry.rate - half);
  entry.ci_hi = std::min(1.0, entry.rate + half);
  return entry;
}

StudyReport run_size_study(const ExperimentConfig& config) {
  const auto model = make_model(config.model_name, config.model_params);
  const auto law = std::make_shared<InvariantLaw>(model);

  std::vector<Scenario> scenarios;
  for (std::size_t i = 0; i < config.theta0s.size(); ++i) {
    const double theta0 = config.theta0s[i];
    const auto& iv = model.theta_interval;
    if (!(theta0 >= iv.alpha && theta0 <= iv.beta)) {
      throw ConfigError("theta0 outside the model's parameter interval");
    }
    Scenario s;
    s.label = "theta0=" + format_double(theta0);
    s.T = config.T;
    s.base_seed = derive_seed(config.seed, i);
    s.fingerprint = scenario_fingerprint(config, "size", s.label, config.T,
                                         s.base_seed);
    const double T = config.T, dt = config.dt;
    auto model_copy = model;
    s.make_path = [model_copy, theta0, T, dt, law](std::uint64_t seed) {
      return simulate_path(model_copy, theta0, T, dt, seed,
                           InitRule::stationary(), law.get());
    };
    scenarios.push_back(std::move(s));
  }
  return run_study(config, "size", scenarios, model, *law);
}

StudyReport run_power_study(const ExperimentConfig& config) {
  if (config.alternatives.empty()) {
    throw ConfigError("power study needs [alternatives] drifts");
  }
  const auto model = make_model(config.model_name, config.model_params);
  const auto law = std::make_shared<InvariantLaw>(model);
  const std::vector<double> Ts =
      config.T_list.empty() ? std::vector<double>{config.T} : config.T_list;

  std::vector<Scenario> scenarios;
  std::size_t index = 0;
  for (const auto& alt : config.alternatives) {
    // The alternative's own stationary law, for initialization.
    const auto envelope = check_drift_envelope(alt.drift);
    if (!envelope.es_ok || !envelope.tail.ok) {
      throw ConditionError("alternative '" + alt.label +
                           "' fails ES/A0 on the probe grid");
    }
    const double L =
        envelope.tail.A + std::max(20.0 / envelope.tail.gamma, 10.0);
    const auto alt_law = std::make_shared<InvariantLaw>(
        "alt:" + alt.label, alt.drift, nullptr, L, 1e-3 * L);
    for (const double T : Ts) {
      Scenario s;
      s.label = "alt=" + sanitize_label(alt.label) + " T=" + format_double(T);
      s.T = T;
      s.base_seed = derive_seed(config.seed, 1000 + index);
      s.fingerprint =
          scenario_fingerprint(config, "power", s.label, T, s.base_seed);
      const double dt = config.dt;
      const RealFn drift = alt.drift;
      s.make_path = [drift, T, dt, alt_law](std::uint64_t seed) {
        return alternative_path(drift, T, dt, seed, InitRule::stationary(),
                                alt_law.get());
      };
      scenarios.push_back(std::move(s));
      ++index;
    }
  }
  return run_study(config, "power", scenarios, model, *law);
}

void write_study_csv(const StudyReport& report, const std::string& out_dir,
                     const std::string& study_name) {
  fs::create_directories(out_dir);

  std::string rates = "scenario,kind,epsilon,replications,rejections,rate,"
                      "ci_lo,ci_hi\n";
  std::string stats = "scenario,kind,replicate,value,theta_hat\n";
  std::string hist = "scenario,kind,bin_lo,bin_hi,count\n";
  constexpr std::size_t kBins = 50;

  for (const auto& res : report.scenarios) {
    for (const auto& rate : res.rates) {
      rates += res.scenario + "," + to_string(res.kind) + "," +
               format_double(rate.epsilon) + "," +
               std::to_string(res.replications) + "," +
               std::to_string(rate.rejections) + "," +
               format_double(rate.rate) + "," + format_double(rate.ci_lo) +
               "," + format_double(rate.ci_hi) + "\n";
    }
    for (std::size_t r = 0; r < res.values.size(); ++r) {
      stats += res.scenario + "," + to_string(res.kind) + "," +
               std::to_string(r) + "," + format_double(res.values[r]) + "," +
               format_double(res.theta_hats[r]) + "\n";
    }
    const double vmax =
        res.values.empty()
            ? 1.0
            : *std::max_element(res.values.begin(), res.values.end());
    const double width = vmax > 0.0 ? vmax / kBins : 1.0;
    std::vector<std::size_t> counts(kBins, 0);
    for (const double v : res.values) {
      auto b = static_cast<std::size_t>(v / width);
      if (b >= kBins) b = kBins - 1;
      ++counts[b];
    }
    for (std::size_t b = 0; b < kBins; ++b) {
      hist += res.scenario + "," + to_string(res.kind) + "," +
              format_double(width * static_cast<double>(b)) + "," +
              format_double(width * static_cast<double>(b + 1)) + "," +
              std::to_string(counts[b]) + "\n";
    }
  }

  auto dump = [&](const std::string& name, const std::string& content) {
    std::ofstream f(out_dir + "/" + study_name + "_" + name,
                    std::ios::trunc | std::ios::binary);
    if (!f) throw ConfigError("cannot write study outputs under " + out_dir);
    f << content;
  };
  dump("rates.csv", rates);
  dump("statistics.csv", stats);
  dump("hist.csv", hist);
}

namespace {

// Gaussian KDE with Silverman's bandwidth, evaluated at fixed centers.
std::vector<std::pair<double, double>> kde_curve(std::vector<double> samples,
                                                 std::size_t centers) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (const double v : samples) mean += v;
  mean /= nd;
  double var = 0.0;
  for (const double v : samples) var += (v - mean) * (v - mean);
  var /= (nd - 1.0);
  const double sd = std::sqrt(var);
  const double iqr = samples[static_cast<std::size_t>(0.75 * nd)] -
                     samples[static_cast<std::size_t>(0.25 * nd)];
  const double spread = std::min(sd, iqr / 1.34);
  const double bw = std::max(0.9 * spread * std::pow(nd, -0.2), 1e-6);

  const double hi = samples[static_cast<std::size_t>(0.999 * (nd - 1.0))];
  std::vector<std::pair<double, double>> curve(centers);
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  for (std::size_t i = 0; i < centers; ++i) {
    const double x = hi * (static_cast<double>(i) + 0.5) /
                     static_cast<double>(centers);
    const auto lo_it = std::lower_bound(samples.begin(), samples.end(),
                                        x - 8.0 * bw);
    const auto hi_it = std::upper_bound(lo_it, samples.end(), x + 8.0 * bw);
    double acc = 0.0;
    for (auto it = lo_it; it != hi_it; ++it) {
      const double u = (*it - x) / bw;
      acc += std::exp(-0.5 * u * u);
    }
    curve[i] = {x, acc * inv_sqrt_2pi / (nd * bw)};
  }
  return curve;
}

}  // namespace

void reproduce_ou_figures(const FigureInputs& inputs) {
  const auto delta_batch = load_batch(inputs.delta_batch_file);
  const auto Delta_batch = load_batch(inputs.Delta_batch_file);
  if (delta_batch.kind != LimitKind::delta) {
    throw ConfigError("'" + inputs.delta_batch_file +
                      "' does not hold delta samples");
  }
  if (Delta_batch.kind != LimitKind::Delta) {
    throw ConfigError("'" + inputs.Delta_batch_file +
                      "' does not hold Delta samples");
  }
  fs::create_directories(inputs.out_dir);

  std::string density = "kind,bin_center,density\n";
  for (const auto* batch : {&delta_batch, &Delta_batch}) {
    for (const auto& [x, d] : kde_curve(batch->samples, 200)) {
      density += to_string(batch->kind) + "," + format_double(x) + "," +
                 format_double(d) + "\n";
    }
  }

  std::vector<double> eps;
  for (int i = 1; i <= 50; ++i) eps.push_back(0.01 * i);
  const auto d_table = estimate_quantiles(delta_batch, eps);
  const auto c_table = estimate_quantiles(Delta_batch, eps);
  std::string thresholds = "epsilon,d_eps,c_eps\n";
  for (std::size_t i = 0; i < eps.size(); ++i) {
    thresholds += format_double(d_table.epsilons[i]) + "," +
                  format_double(d_table.thresholds[i]) + "," +
                  format_double(c_table.thresholds[i]) + "\n";
  }

  auto dump = [&](const std::string& name, const std::string& content) {
    std::ofstream f(inputs.out_dir + "/" + name,
                    std::ios::trunc | std::ios::binary);
    if (!f) {
      throw ConfigError("cannot write figures under " + inputs.out_dir);
    }
    f << content;
  };
  dump("figure_density.csv", density);
  dump("figure_thresholds.csv", thresholds);
}

}  // namespace cvmshift
