#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvmshift/errors.hpp"
#include "cvmshift/io.hpp"
#include "cvmshift/model.hpp"
#include "cvmshift/simulate.hpp"
#include "doctest.h"

using namespace cvmshift;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("cvmshift_io_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const {
    return (dir / name).string();
  }
};

LimitSampleBatch small_batch() {
  LimitSampleBatch b;
  b.kind = LimitKind::Delta;
  b.model_ref = "ou";
  b.seed = 99;
  b.n_mc = 5;
  b.y_grid = {-5.0, 5.0, 0.01};
  b.x_grid = {-4.0, 4.0, 0.02};
  b.samples = {0.1, 0.7, 0.32453252352, 1.5e-7, 2.25};
  return b;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, 0.0}) {
    CHECK(parse_double(format_double(v)) == v);
    CHECK(parse_double(format_double_17(v)) == v);
  }
}

TEST_CASE("path csv round trip") {
  TempDir tmp;
  const auto ou = make_model("ou");
  Path p = simulate_path(ou, 0.7, 10.0, 0.01, 123, InitRule::fixed(0.1));
  write_path_csv(p, tmp.file("p.csv"));
  const Path q = read_path_csv(tmp.file("p.csv"));
  CHECK(q.dt == p.dt);
  CHECK(q.seed == p.seed);
  REQUIRE(q.theta_true.has_value());
  CHECK(*q.theta_true == 0.7);
  REQUIRE(q.values.size() == p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    CHECK(q.values[i] == p.values[i]);
  }

  p.theta_true.reset();
  write_path_csv(p, tmp.file("p2.csv"));
  CHECK_FALSE(read_path_csv(tmp.file("p2.csv")).theta_true.has_value());

  std::ofstream(tmp.file("bad.csv")) << "nonsense\n1.0\n";
  CHECK_THROWS_AS(read_path_csv(tmp.file("bad.csv")), ConfigError);
}

TEST_CASE("law export carries metadata and full tables") {
  TempDir tmp;
  const InvariantLaw law(make_model("ou"));
  export_law_csv(law, tmp.file("law.csv"));
  std::ifstream in(tmp.file("law.csv"));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("# G=", 0) == 0);
  CHECK(line.find(" I=") != std::string::npos);
  CHECK(line.find(" gamma=") != std::string::npos);
  REQUIRE(std::getline(in, line));
  CHECK(line == "x,f,F");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == law.grid().size());
}

TEST_CASE("batch and table files round trip bit-exactly") {
  TempDir tmp;
  const auto batch = small_batch();
  save_batch(batch, tmp.file("b.dat"));
  const auto loaded = load_batch(tmp.file("b.dat"));
  CHECK(loaded.kind == batch.kind);
  CHECK(loaded.model_ref == batch.model_ref);
  CHECK(loaded.seed == batch.seed);
  CHECK(loaded.n_mc == batch.n_mc);
  CHECK(loaded.y_grid.lo == batch.y_grid.lo);
  CHECK(loaded.x_grid.h == batch.x_grid.h);
  REQUIRE(loaded.samples.size() == batch.samples.size());
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    CHECK(loaded.samples[i] == batch.samples[i]);
  }

  QuantileTable table;
  table.kind = LimitKind::delta;
  table.model_ref = "ou";
  table.epsilons = {0.01, 0.05};
  table.thresholds = {2.345678901234567, 1.234567890123456};
  table.n_mc = 100000;
  table.seed = 5;
  table.y_grid = batch.y_grid;
  table.x_grid = batch.x_grid;
  save_table(table, tmp.file("t.dat"));
  const auto tload = load_table(tmp.file("t.dat"));
  CHECK(tload.kind == table.kind);
  CHECK(tload.model_ref == "ou");
  CHECK(tload.n_mc == 100000);
  REQUIRE(tload.epsilons.size() == 2);
  CHECK(tload.epsilons[1] == 0.05);
  CHECK(tload.thresholds[0] == table.thresholds[0]);
  CHECK(tload.thresholds[1] == table.thresholds[1]);
}

TEST_CASE("corruption and format confusion are detected") {
  TempDir tmp;
  save_batch(small_batch(), tmp.file("b.dat"));

  // flip one byte in the middle
  std::string text;
  {
    std::ifstream in(tmp.file("b.dat"));
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  std::ofstream(tmp.file("bc.dat"), std::ios::binary) << text;
  CHECK_THROWS_AS(load_batch(tmp.file("bc.dat")), ConfigError);

  // a batch file is not a table and vice versa
  CHECK_THROWS_AS(load_table(tmp.file("b.dat")), ConfigError);

  // unknown version
  std::string v2 = "version=2\ncontent=samples\nkind=delta\nmodel=ou\n";
  std::ofstream(tmp.file("v2.dat"), std::ios::binary) << v2;
  CHECK_THROWS_AS(load_batch(tmp.file("v2.dat")), ConfigError);

  CHECK_THROWS_AS(load_batch(tmp.file("missing.dat")), ConfigError);
}
