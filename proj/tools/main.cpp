// cvmshift command-line interface.
//
// Subcommands: simulate, estimate, test, law export, limits simulate,
// limits quantiles, study size, study power, figures ou.
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvmshift/errors.hpp"
#include "cvmshift/estimators.hpp"
#include "cvmshift/experiments.hpp"
#include "cvmshift/gof.hpp"
#include "cvmshift/invariant_law.hpp"
#include "cvmshift/io.hpp"
#include "cvmshift/limit_mc.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/parallel.hpp"
#include "cvmshift/simulate.hpp"

namespace {

using namespace cvmshift;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::map<std::string, double> parse_params(
    const std::vector<std::string>& kvs) {
  std::map<std::string, double> params;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--param expects name=value, got '" + kv + "'");
    }
    params[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1));
  }
  return params;
}

InitRule parse_init(const std::string& spec) {
  if (spec == "stationary") return InitRule::stationary();
  if (spec.rfind("fixed:", 0) == 0) {
    return InitRule::fixed(parse_double(spec.substr(6)));
  }
  throw ConfigError("--init expects 'stationary' or 'fixed:<x0>'");
}

std::vector<double> parse_eps_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find(',', start);
    if (end == std::string::npos) end = csv.size();
    if (end > start) out.push_back(parse_double(csv.substr(start, end - start)));
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("--eps expects a comma-separated list");
  return out;
}

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;

  void apply(ExperimentConfig& config) const {
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (out_dir) config.out_dir = *out_dir;
  }
};

void print_study_summary(const StudyReport& report) {
  for (const auto& s : report.scenarios) {
    for (const auto& r : s.rates) {
      std::printf("%s %s eps=%g rate=%.4f [%.4f, %.4f] (%zu/%zu)\n",
                  s.scenario.c_str(), to_string(s.kind).c_str(), r.epsilon,
                  r.rate, r.ci_lo, r.ci_hi, r.rejections, s.replications);
    }
  }
  std::printf("done in %.1f s on %zu threads\n", report.wall_seconds,
              report.threads_used);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cramer-von Mises goodness-of-fit tests for ergodic "
               "diffusions with an unknown shift parameter"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option_function<std::uint64_t>(
      "--seed", [&](std::uint64_t v) { global.seed = v; },
      "Override the seed used by studies/figures");
  app.add_option_function<std::size_t>(
      "--threads", [&](std::size_t v) { global.threads = v; },
      "Worker threads (0 = hardware)");
  app.add_option_function<std::string>(
      "--out-dir", [&](std::string v) { global.out_dir = std::move(v); },
      "Override the output directory");

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Simulate a trajectory");
  std::string sim_model = "ou";
  std::vector<std::string> sim_params;
  double sim_theta0 = 0.0, sim_T = 100.0, sim_dt = 0.01;
  std::uint64_t sim_seed = 1;
  std::string sim_init = "stationary";
  std::string sim_dump;
  sim->add_option("--model", sim_model, "Model family name");
  sim->add_option("--param", sim_params, "Model parameter name=value");
  sim->add_option("--theta0", sim_theta0, "True shift parameter");
  sim->add_option("--T", sim_T, "Time horizon");
  sim->add_option("--dt", sim_dt, "Time step");
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--init", sim_init, "stationary | fixed:<x0>");
  sim->add_option("--dump-path", sim_dump, "Write the path CSV here")
      ->required();

  // ---- law ---------------------------------------------------------------
  auto* law_cmd = app.add_subcommand("law", "Invariant law utilities");
  auto* law_export = law_cmd->add_subcommand("export", "Export x,f,F table");
  std::string law_model = "ou";
  std::vector<std::string> law_params;
  std::string law_out;
  law_export->add_option("--model", law_model, "Model family name");
  law_export->add_option("--param", law_params, "Model parameter name=value");
  law_export->add_option("--out", law_out, "Output file (default stdout)");

  // ---- estimate ----------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "Estimate the shift parameter");
  std::string est_method = "mle", est_path, est_model = "ou", est_curve;
  std::vector<std::string> est_params;
  est->add_option("--method", est_method, "mle | mde")->required();
  est->add_option("--path", est_path, "Path CSV file")->required();
  est->add_option("--model", est_model, "Model family name");
  est->add_option("--param", est_params, "Model parameter name=value");
  est->add_option("--curve", est_curve, "Write the objective curve CSV here");

  // ---- test --------------------------------------------------------------
  auto* test_cmd = app.add_subcommand("test", "Run one goodness-of-fit test");
  std::string test_kind, test_path, test_model = "ou", test_table;
  std::vector<std::string> test_params;
  double test_eps = 0.05;
  test_cmd->add_option("--kind", test_kind, "delta_lte | delta_edf | mu_kernel")
      ->required();
  test_cmd->add_option("--path", test_path, "Path CSV file")->required();
  test_cmd->add_option("--model", test_model, "Model family name");
  test_cmd->add_option("--param", test_params, "Model parameter name=value");
  test_cmd->add_option("--table", test_table, "Quantile table file")
      ->required();
  test_cmd->add_option("--epsilon", test_eps, "Significance level");

  // ---- limits ------------------------------------------------------------
  auto* limits = app.add_subcommand("limits", "Limit-law Monte Carlo");
  auto* lim_sim = limits->add_subcommand("simulate", "Sample the limit law");
  std::string lim_kind = "delta", lim_model = "ou", lim_out;
  std::vector<std::string> lim_params;
  std::size_t lim_n = 100000;
  std::uint64_t lim_seed = 1;
  lim_sim->add_option("--kind", lim_kind, "delta | Delta | mu");
  lim_sim->add_option("--model", lim_model, "Model family name");
  lim_sim->add_option("--param", lim_params, "Model parameter name=value");
  lim_sim->add_option("--n", lim_n, "Number of replicates");
  lim_sim->add_option("--seed", lim_seed, "Seed");
  lim_sim->add_option("--out", lim_out, "Batch output file")->required();

  auto* lim_quant =
      limits->add_subcommand("quantiles", "Quantile table from a batch");
  std::string lq_in, lq_eps = "0.01,0.05,0.1", lq_out;
  lim_quant->add_option("--in", lq_in, "Batch file")->required();
  lim_quant->add_option("--eps", lq_eps, "Comma-separated epsilons");
  lim_quant->add_option("--out", lq_out, "Write the table file here");

  // ---- study -------------------------------------------------------------
  auto* study = app.add_subcommand("study", "Size/power experiments");
  auto* study_size = study->add_subcommand("size", "Size study under H0");
  auto* study_power = study->add_subcommand("power", "Power study under H1");
  std::string size_config, power_config;
  study_size->add_option("--config", size_config, "Config file")->required();
  study_power->add_option("--config", power_config, "Config file")->required();

  // ---- figures -----------------------------------------------------------
  auto* figures = app.add_subcommand("figures", "Reproduce figure data");
  auto* fig_ou = figures->add_subcommand(
      "ou", "Density and threshold curves from delta/Delta batches");
  std::string fig_delta, fig_Delta, fig_dir = "out";
  fig_ou->add_option("--delta", fig_delta, "delta batch file")->required();
  fig_ou->add_option("--Delta", fig_Delta, "Delta batch file")->required();
  fig_ou->add_option("--dir", fig_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) {
      const auto model = make_model(sim_model, parse_params(sim_params));
      const Path path = simulate_path(model, sim_theta0, sim_T, sim_dt,
                                      sim_seed, parse_init(sim_init));
      write_path_csv(path, sim_dump);
      std::printf("wrote %zu samples to %s\n", path.values.size(),
                  sim_dump.c_str());
    } else if (*law_export) {
      const auto model = make_model(law_model, parse_params(law_params));
      const InvariantLaw law(model);
      if (law_out.empty()) {
        std::printf("# G=%s I=%s A=%s gamma=%s\nx,f,F\n",
                    format_double(law.G()).c_str(),
                    format_double(law.fisher()).c_str(),
                    format_double(law.tail_A()).c_str(),
                    format_double(law.tail_gamma()).c_str());
        for (std::size_t i = 0; i < law.grid().size(); ++i) {
          std::printf("%s,%s,%s\n",
                      format_double(law.grid().node(i)).c_str(),
                      format_double(law.f_vals()[i]).c_str(),
                      format_double(law.F_vals()[i]).c_str());
        }
      } else {
        export_law_csv(law, law_out);
        std::printf("wrote law table to %s\n", law_out.c_str());
      }
    } else if (*est) {
      const auto model = make_model(est_model, parse_params(est_params));
      const Path path = read_path_csv(est_path);
      OptimOptions options;
      options.record_curve = !est_curve.empty();
      ShiftEstimate estimate;
      if (est_method == "mle") {
        estimate = mle_shift(path, model, options);
      } else if (est_method == "mde") {
        const InvariantLaw law(model);
        estimate = mde_shift(path, model, law, options);
      } else {
        throw ConfigError("--method must be mle or mde");
      }
      if (!est_curve.empty()) {
        std::string csv = "theta,objective\n";
        for (const auto& [theta, value] : estimate.objective_curve) {
          csv += format_double(theta) + "," + format_double(value) + "\n";
        }
        std::ofstream f(est_curve, std::ios::trunc | std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + est_curve + "'");
        f << csv;
      }
      std::printf("theta_hat = %s (%s)%s\n",
                  format_double(estimate.theta_hat).c_str(),
                  est_method.c_str(),
                  estimate.boundary_hit ? " [boundary hit]" : "");
    } else if (*test_cmd) {
      const auto model = make_model(test_model, parse_params(test_params));
      const Path path = read_path_csv(test_path);
      const InvariantLaw law(model);
      const StatKind kind = stat_kind_from_string(test_kind);
      TestReport report;
      switch (kind) {
        case StatKind::delta_lte: report = cvm_lte(path, model, law); break;
        case StatKind::delta_edf: report = cvm_edf(path, model, law); break;
        case StatKind::mu_kernel: report = cvm_kernel(path, model, law); break;
        default:
          throw ConfigError("test supports delta_lte, delta_edf, mu_kernel");
      }
      const auto table = load_table(test_table);
      report = decide(report, table, test_eps);
      nlohmann::json j{{"kind", to_string(report.kind)},
                       {"value", report.value},
                       {"theta_hat", report.theta_hat},
                       {"threshold", *report.threshold},
                       {"epsilon", *report.epsilon},
                       {"reject", *report.reject}};
      std::printf("%s\n", j.dump().c_str());
    } else if (*lim_sim) {
      const auto model = make_model(lim_model, parse_params(lim_params));
      const InvariantLaw law(model);
      const auto batch = simulate_limit(
          limit_kind_from_string(lim_kind), law, lim_n,
          global.seed.value_or(lim_seed), nullptr,
          global.threads.value_or(0));
      save_batch(batch, lim_out);
      std::printf("wrote %zu samples to %s\n", batch.samples.size(),
                  lim_out.c_str());
    } else if (*lim_quant) {
      const auto batch = load_batch(lq_in);
      const auto eps = parse_eps_list(lq_eps);
      const auto table = estimate_quantiles(batch, eps);
      for (std::size_t i = 0; i < table.epsilons.size(); ++i) {
        std::printf("%s,%s\n", format_double(table.epsilons[i]).c_str(),
                    format_double(table.thresholds[i]).c_str());
      }
      if (!lq_out.empty()) {
        save_table(table, lq_out);
        std::printf("wrote table to %s\n", lq_out.c_str());
      }
    } else if (*study_size) {
      auto config = load_config(size_config);
      global.apply(config);
      print_study_summary(run_size_study(config));
    } else if (*study_power) {
      auto config = load_config(power_config);
      global.apply(config);
      print_study_summary(run_power_study(config));
    } else if (*fig_ou) {
      FigureInputs inputs;
      inputs.delta_batch_file = fig_delta;
      inputs.Delta_batch_file = fig_Delta;
      inputs.out_dir = global.out_dir.value_or(fig_dir);
      reproduce_ou_figures(inputs);
      std::printf("wrote figure_density.csv and figure_thresholds.csv to "
                  "%s\n",
                  inputs.out_dir.c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
