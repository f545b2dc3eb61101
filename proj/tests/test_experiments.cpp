#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvmshift/errors.hpp"
#include "cvmshift/experiments.hpp"
#include "cvmshift/io.hpp"
#include "cvmshift/limit_mc.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace cvmshift;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& tag) {
    dir = fs::temp_directory_path() /
          ("cvmshift_exp_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const {
    return (dir / name).string();
  }
};

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const std::string& file, const std::string& out_dir,
                  const std::string& table_dir, std::size_t threads) {
  std::ofstream f(file);
  f << "# desk-scale smoke study\n"
    << "[model]\n"
    << "name = ou\n"
    << "[study]\n"
    << "T = 50\n"
    << "dt = 0.05\n"
    << "replications = 40\n"
    << "theta0 = 0, 1\n"
    << "epsilons = 0.05, 0.1\n"
    << "statistics = delta_lte, delta_edf\n"
    << "seed = 3\n"
    << "threads = " << threads << "\n"
    << "[alternatives]\n"
    << "drifts = linear(2)\n"
    << "T_list = 50\n"
    << "[tables]\n"
    << "delta = " << table_dir << "/ou_delta.table\n"
    << "Delta = " << table_dir << "/ou_Delta.table\n"
    << "[limits]\n"
    << "n_mc = 10000\n"
    << "seed = 42\n"
    << "[output]\n"
    << "dir = " << out_dir << "\n";
}

}  // namespace

TEST_CASE("alternative drift parsing") {
  const auto lin = parse_alternative("linear(2)");
  CHECK(lin.drift(1.0) == doctest::Approx(-2.0));
  CHECK(lin.label == "linear(2)");

  const auto cub = parse_alternative("cubic(1)");
  CHECK(cub.drift(2.0) == doctest::Approx(-8.0));

  const auto th = parse_alternative("tanh(1,0.1)");
  CHECK(th.drift(3.0) == doctest::Approx(-std::tanh(3.0) - 0.3));

  CHECK_THROWS_AS(parse_alternative("linear"), ConfigError);
  CHECK_THROWS_AS(parse_alternative("exp(1)"), ConfigError);
  CHECK_THROWS_AS(parse_alternative("linear(1,2)"), ConfigError);
}

TEST_CASE("config loading is strict") {
  TempDir tmp("cfg");
  write_config(tmp.file("ok.cfg"), tmp.file("out"), tmp.file("tables"), 1);
  const auto config = load_config(tmp.file("ok.cfg"));
  CHECK(config.model_name == "ou");
  CHECK(config.T == 50.0);
  CHECK(config.replications == 40);
  REQUIRE(config.theta0s.size() == 2);
  CHECK(config.theta0s[1] == 1.0);
  REQUIRE(config.statistics.size() == 2);
  CHECK(config.statistics[1] == StatKind::delta_edf);
  REQUIRE(config.alternatives.size() == 1);
  CHECK(config.limits_n_mc == 10000);
  CHECK(config.tables.at(LimitKind::delta) ==
        tmp.file("tables") + "/ou_delta.table");

  std::ofstream(tmp.file("bad1.cfg")) << "[study]\nTT = 1\n";
  CHECK_THROWS_AS(load_config(tmp.file("bad1.cfg")), ConfigError);
  std::ofstream(tmp.file("bad2.cfg")) << "[nosuch]\nx = 1\n";
  CHECK_THROWS_AS(load_config(tmp.file("bad2.cfg")), ConfigError);
  std::ofstream(tmp.file("bad3.cfg")) << "[study]\nnot a kv line\n";
  CHECK_THROWS_AS(load_config(tmp.file("bad3.cfg")), ConfigError);
  std::ofstream(tmp.file("bad4.cfg")) << "[study]\nepsilons = 1.5\n";
  CHECK_THROWS_AS(load_config(tmp.file("bad4.cfg")), ConfigError);
  CHECK_THROWS_AS(load_config(tmp.file("missing.cfg")), ConfigError);
}

TEST_CASE("rejection rate confidence intervals") {
  const auto mid = rejection_rate(0.05, 20, 400);
  CHECK(mid.rate == doctest::Approx(0.05));
  CHECK(mid.ci_lo > 0.0);
  CHECK(mid.ci_hi < 0.12);
  CHECK(mid.ci_lo < 0.05);
  CHECK(mid.ci_hi > 0.05);

  const auto zero = rejection_rate(0.05, 0, 400);
  CHECK(zero.rate == 0.0);
  CHECK(zero.ci_lo == 0.0);
  CHECK(zero.ci_hi > 0.0);

  const auto full = rejection_rate(0.05, 400, 400);
  CHECK(full.rate == 1.0);
  CHECK(full.ci_hi == 1.0);
  CHECK(full.ci_lo < 1.0);
}

TEST_CASE("size study runs, caches, and reproduces byte-identically") {
  TempDir tmp("size");
  write_config(tmp.file("s.cfg"), tmp.file("out"), tmp.file("tables"), 2);
  const auto config = load_config(tmp.file("s.cfg"));

  const auto report = run_size_study(config);
  // 2 theta0 scenarios x 2 statistics
  REQUIRE(report.scenarios.size() == 4);
  for (const auto& scenario : report.scenarios) {
    CHECK(scenario.replications == 40);
    CHECK(scenario.values.size() == 40);
    REQUIRE(scenario.rates.size() == 2);
    for (const auto& rate : scenario.rates) {
      CHECK(rate.rate >= 0.0);
      CHECK(rate.rate <= 1.0);
      CHECK(rate.ci_lo <= rate.rate);
      CHECK(rate.ci_hi >= rate.rate);
    }
    // nested rejection regions on the same replicates
    CHECK(scenario.rates[0].rate <= scenario.rates[1].rate);
  }

  const std::string rates1 = slurp(tmp.file("out") + "/size_rates.csv");
  const std::string stats1 = slurp(tmp.file("out") + "/size_statistics.csv");
  const std::string hist1 = slurp(tmp.file("out") + "/size_hist.csv");
  CHECK(rates1.rfind("scenario,kind,epsilon", 0) == 0);

  // rerun resumes from the cache and emits identical bytes
  const auto report2 = run_size_study(config);
  CHECK(report2.scenarios.size() == 4);
  CHECK(slurp(tmp.file("out") + "/size_rates.csv") == rates1);
  CHECK(slurp(tmp.file("out") + "/size_statistics.csv") == stats1);
  CHECK(slurp(tmp.file("out") + "/size_hist.csv") == hist1);

  // drop one scenario cache; the rerun recomputes it identically
  fs::remove(tmp.file("out") + "/cache/size_s1.csv");
  run_size_study(config);
  CHECK(slurp(tmp.file("out") + "/size_statistics.csv") == stats1);

  // single-threaded run gives the same bytes
  write_config(tmp.file("s1.cfg"), tmp.file("out1"), tmp.file("tables"), 1);
  run_size_study(load_config(tmp.file("s1.cfg")));
  CHECK(slurp(tmp.file("out1") + "/size_statistics.csv") == stats1);

  // tables were materialized on first use
  CHECK(fs::exists(tmp.file("tables") + "/ou_delta.table"));
  const auto table = load_table(tmp.file("tables") + "/ou_delta.table");
  CHECK(table.model_ref == "ou");
  CHECK(table.n_mc == 10000);
}

TEST_CASE("power study rejects a strong alternative and stays honest under "
          "the null member") {
  TempDir tmp("power");
  write_config(tmp.file("p.cfg"), tmp.file("out"), tmp.file("tables"), 2);
  auto config = load_config(tmp.file("p.cfg"));
  config.alternatives.clear();
  config.alternatives.push_back(parse_alternative("linear(2)"));
  config.alternatives.push_back(parse_alternative("linear(1)"));  // = null
  config.T_list = {50.0};

  const auto report = run_power_study(config);
  REQUIRE(report.scenarios.size() == 4);  // 2 drifts x 2 statistics

  for (const auto& scenario : report.scenarios) {
    const double rate05 = scenario.rates[0].rate;
    if (scenario.scenario.find("linear(2)") != std::string::npos) {
      CHECK(rate05 >= 0.5);  // strong alternative at small T
    } else {
      CHECK(rate05 <= 0.30);  // null member behaves like a size run
    }
  }
  CHECK(fs::exists(tmp.file("out") + "/power_rates.csv"));
}

TEST_CASE("figures: densities and threshold curves from batches") {
  TempDir tmp("fig");
  const InvariantLaw law(make_model("ou"));
  const auto d_batch = simulate_limit(LimitKind::delta, law, 50000, 5,
                                      nullptr, 2);
  const auto D_batch = simulate_limit(LimitKind::Delta, law, 20000, 6,
                                      nullptr, 2);
  save_batch(d_batch, tmp.file("d.batch"));
  save_batch(D_batch, tmp.file("D.batch"));

  FigureInputs inputs;
  inputs.delta_batch_file = tmp.file("d.batch");
  inputs.Delta_batch_file = tmp.file("D.batch");
  inputs.out_dir = tmp.file("fig");
  reproduce_ou_figures(inputs);

  // threshold curve: strictly decreasing for both statistics
  std::ifstream th(tmp.file("fig") + "/figure_thresholds.csv");
  std::string line;
  REQUIRE(std::getline(th, line));
  CHECK(line == "epsilon,d_eps,c_eps");
  double prev_d = 1e18, prev_c = 1e18;
  std::size_t rows = 0;
  while (std::getline(th, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string e, d, c;
    std::getline(ss, e, ',');
    std::getline(ss, d, ',');
    std::getline(ss, c);
    const double dv = parse_double(d), cv = parse_double(c);
    CHECK(dv < prev_d);
    CHECK(cv < prev_c);
    prev_d = dv;
    prev_c = cv;
    ++rows;
  }
  CHECK(rows == 50);

  // densities: nonnegative on [0, inf) with an interior mode
  std::ifstream de(tmp.file("fig") + "/figure_density.csv");
  REQUIRE(std::getline(de, line));
  CHECK(line == "kind,bin_center,density");
  double first_density = -1.0, max_density = 0.0, max_center = 0.0;
  while (std::getline(de, line)) {
    if (line.rfind("delta,", 0) != 0) continue;
    std::istringstream ss(line);
    std::string k, x, d;
    std::getline(ss, k, ',');
    std::getline(ss, x, ',');
    std::getline(ss, d);
    const double xv = parse_double(x), dv = parse_double(d);
    CHECK(xv > 0.0);
    CHECK(dv >= 0.0);
    if (first_density < 0.0) first_density = dv;
    if (dv > max_density) {
      max_density = dv;
      max_center = xv;
    }
  }
  CHECK(max_density > first_density);
  CHECK(max_center > 0.0);

  // a second seed reproduces the density curve within MC noise; the two
  // curves sit on slightly different center grids, so compare by linear
  // interpolation on the overlap
  const auto d2 = simulate_limit(LimitKind::delta, law, 50000, 777, nullptr,
                                 2);
  save_batch(d2, tmp.file("d2.batch"));
  FigureInputs inputs2 = inputs;
  inputs2.delta_batch_file = tmp.file("d2.batch");
  inputs2.out_dir = tmp.file("fig2");
  reproduce_ou_figures(inputs2);

  auto read_curve = [](const std::string& file) {
    std::ifstream in(file);
    std::string row;
    std::getline(in, row);
    std::vector<std::pair<double, double>> out;
    while (std::getline(in, row)) {
      if (row.rfind("delta,", 0) != 0) continue;
      std::istringstream ss(row);
      std::string k, x, d;
      std::getline(ss, k, ',');
      std::getline(ss, x, ',');
      std::getline(ss, d);
      out.emplace_back(parse_double(x), parse_double(d));
    }
    return out;
  };
  const auto ca = read_curve(tmp.file("fig") + "/figure_density.csv");
  const auto cb = read_curve(tmp.file("fig2") + "/figure_density.csv");
  auto eval = [](const std::vector<std::pair<double, double>>& c, double x) {
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c[i].first >= x) {
        const double w =
            (x - c[i - 1].first) / (c[i].first - c[i - 1].first);
        return c[i - 1].second + w * (c[i].second - c[i - 1].second);
      }
    }
    return c.back().second;
  };
  double sup = 0.0;
  for (const auto& [x, d] : ca) {
    if (x < cb.front().first || x > cb.back().first) continue;
    sup = std::max(sup, std::abs(d - eval(cb, x)));
  }
  CHECK(sup < 0.05);

  // mismatched batch kinds are rejected
  FigureInputs wrong = inputs;
  wrong.delta_batch_file = tmp.file("D.batch");
  CHECK_THROWS_AS(reproduce_ou_figures(wrong), ConfigError);
}
