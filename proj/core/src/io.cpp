#include "cvmshift/io.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "cvmshift/errors.hpp"

namespace cvmshift {

namespace {

std::string read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + file + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + file + "' for writing");
  out << content;
  if (!out) throw ConfigError("write to '" + file + "' failed");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::uint32_t crc_of(const std::string& bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string crc_line(const std::string& body) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc_of(body));
  return std::string("crc32=") + buf + "\n";
}

// Splits "key=value", throws on malformed lines.
std::pair<std::string, std::string> parse_kv(const std::string& line) {
  const auto pos = line.find('=');
  if (pos == std::string::npos) {
    throw ConfigError("malformed header line '" + line + "'");
  }
  return {line.substr(0, pos), line.substr(pos + 1)};
}

std::string format_grid(const GridSpec& y, const GridSpec& x) {
  return format_double(y.lo) + "," + format_double(y.hi) + "," +
         format_double(y.h) + ";" + format_double(x.lo) + "," +
         format_double(x.hi) + "," + format_double(x.h);
}

std::pair<GridSpec, GridSpec> parse_grid(const std::string& s) {
  const auto semi = s.find(';');
  if (semi == std::string::npos) throw ConfigError("malformed grid spec");
  auto parse_triplet = [](const std::string& part) {
    GridSpec g;
    std::istringstream ss(part);
    std::string tok;
    double* slots[3] = {&g.lo, &g.hi, &g.h};
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ss, tok, ',')) {
        throw ConfigError("malformed grid spec");
      }
      *slots[i] = parse_double(tok);
    }
    return g;
  };
  return {parse_triplet(s.substr(0, semi)), parse_triplet(s.substr(semi + 1))};
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed integer '" + s + "'");
  }
  return v;
}

// Validates the crc trailer and returns the lines before it.
std::vector<std::string> checked_body_lines(const std::string& file) {
  const std::string text = read_file(file);
  const auto crc_pos = text.rfind("crc32=");
  if (crc_pos == std::string::npos ||
      (crc_pos != 0 && text[crc_pos - 1] != '\n')) {
    throw ConfigError("'" + file + "': missing crc32 trailer");
  }
  const std::string body = text.substr(0, crc_pos);
  std::string trailer = text.substr(crc_pos);
  if (!trailer.empty() && trailer.back() == '\n') trailer.pop_back();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc_of(body));
  if (trailer != std::string("crc32=") + buf) {
    throw ConfigError("'" + file + "': crc32 mismatch (corrupt file?)");
  }
  return split_lines(body);
}

struct BatchHeader {
  LimitKind kind;
  std::string model;
  std::size_t n_mc;
  std::uint64_t seed;
  GridSpec y_grid, x_grid;
  std::size_t first_data_line;
  bool is_samples = false;
};

BatchHeader parse_header(const std::vector<std::string>& lines,
                         const std::string& file) {
  BatchHeader h{};
  std::size_t i = 0;
  bool have_kind = false, have_model = false, have_n = false,
       have_seed = false, have_grid = false;
  if (i >= lines.size()) throw ConfigError("'" + file + "': empty file");
  {
    const auto [key, value] = parse_kv(lines[i]);
    if (key != "version") {
      throw ConfigError("'" + file + "': first line must be version=");
    }
    if (value != "1") {
      throw ConfigError("'" + file + "': unknown version '" + value + "'");
    }
    ++i;
  }
  for (; i < lines.size(); ++i) {
    if (lines[i].find('=') == std::string::npos) break;
    const auto [key, value] = parse_kv(lines[i]);
    if (key == "content") {
      h.is_samples = (value == "samples");
    } else if (key == "kind") {
      h.kind = limit_kind_from_string(value);
      have_kind = true;
    } else if (key == "model") {
      h.model = value;
      have_model = true;
    } else if (key == "n_mc") {
      h.n_mc = static_cast<std::size_t>(parse_u64(value));
      have_n = true;
    } else if (key == "seed") {
      h.seed = parse_u64(value);
      have_seed = true;
    } else if (key == "grid") {
      std::tie(h.y_grid, h.x_grid) = parse_grid(value);
      have_grid = true;
    } else {
      break;  // data rows (epsilon,threshold) also contain '='-free text
    }
  }
  if (!(have_kind && have_model && have_n && have_seed && have_grid)) {
    throw ConfigError("'" + file + "': incomplete header");
  }
  h.first_data_line = i;
  return h;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double_17(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError("malformed number '" + s + "'");
  }
  return v;
}

void write_path_csv(const Path& path, const std::string& file) {
  std::string out;
  out.reserve(path.values.size() * 20 + 64);
  out += "# dt=" + format_double_17(path.dt) + " theta0=";
  out += path.theta_true ? format_double_17(*path.theta_true) : "NA";
  out += " seed=" + std::to_string(path.seed) + "\n";
  for (const double v : path.values) {
    out += format_double_17(v);
    out += '\n';
  }
  write_file(file, out);
}

Path read_path_csv(const std::string& file) {
  const auto lines = split_lines(read_file(file));
  if (lines.empty() || lines[0].rfind("# dt=", 0) != 0) {
    throw ConfigError("'" + file + "': missing path header '# dt=...'");
  }
  Path path;
  {
    std::istringstream ss(lines[0].substr(2));
    std::string tok;
    while (ss >> tok) {
      const auto [key, value] = parse_kv(tok);
      if (key == "dt") {
        path.dt = parse_double(value);
      } else if (key == "theta0") {
        if (value != "NA") path.theta_true = parse_double(value);
      } else if (key == "seed") {
        path.seed = parse_u64(value);
      } else {
        throw ConfigError("'" + file + "': unknown header field '" + key +
                          "'");
      }
    }
  }
  path.values.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    path.values.push_back(parse_double(lines[i]));
  }
  if (path.values.size() < 2 || !(path.dt > 0.0)) {
    throw ConfigError("'" + file + "': not a valid path file");
  }
  return path;
}

void export_law_csv(const InvariantLaw& law, const std::string& file) {
  std::string out;
  const auto& grid = law.grid();
  out.reserve(grid.size() * 40 + 128);
  out += "# G=" + format_double(law.G()) + " I=" + format_double(law.fisher()) +
         " A=" + format_double(law.tail_A()) +
         " gamma=" + format_double(law.tail_gamma()) + "\n";
  out += "x,f,F\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += format_double(grid.node(i));
    out += ',';
    out += format_double(law.f_vals()[i]);
    out += ',';
    out += format_double(law.F_vals()[i]);
    out += '\n';
  }
  write_file(file, out);
}

void save_table(const QuantileTable& table, const std::string& file) {
  std::string body;
  body += "version=1\n";
  body += "kind=" + to_string(table.kind) + "\n";
  body += "model=" + table.model_ref + "\n";
  body += "n_mc=" + std::to_string(table.n_mc) + "\n";
  body += "seed=" + std::to_string(table.seed) + "\n";
  body += "grid=" + format_grid(table.y_grid, table.x_grid) + "\n";
  for (std::size_t i = 0; i < table.epsilons.size(); ++i) {
    body += format_double(table.epsilons[i]) + "," +
            format_double(table.thresholds[i]) + "\n";
  }
  write_file(file, body + crc_line(body));
}

QuantileTable load_table(const std::string& file) {
  const auto lines = checked_body_lines(file);
  const auto header = parse_header(lines, file);
  if (header.is_samples) {
    throw ConfigError("'" + file + "': holds samples, not a quantile table");
  }
  QuantileTable table;
  table.kind = header.kind;
  table.model_ref = header.model;
  table.n_mc = header.n_mc;
  table.seed = header.seed;
  table.y_grid = header.y_grid;
  table.x_grid = header.x_grid;
  for (std::size_t i = header.first_data_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) {
      throw ConfigError("'" + file + "': malformed row '" + lines[i] + "'");
    }
    table.epsilons.push_back(parse_double(lines[i].substr(0, comma)));
    table.thresholds.push_back(parse_double(lines[i].substr(comma + 1)));
  }
  if (table.epsilons.empty()) {
    throw ConfigError("'" + file + "': table holds no rows");
  }
  return table;
}

void save_batch(const LimitSampleBatch& batch, const std::string& file) {
  std::string body;
  body.reserve(batch.samples.size() * 20 + 160);
  body += "version=1\n";
  body += "content=samples\n";
  body += "kind=" + to_string(batch.kind) + "\n";
  body += "model=" + batch.model_ref + "\n";
  body += "n_mc=" + std::to_string(batch.n_mc) + "\n";
  body += "seed=" + std::to_string(batch.seed) + "\n";
  body += "grid=" + format_grid(batch.y_grid, batch.x_grid) + "\n";
  for (const double s : batch.samples) {
    body += format_double(s);
    body += '\n';
  }
  write_file(file, body + crc_line(body));
}

LimitSampleBatch load_batch(const std::string& file) {
  const auto lines = checked_body_lines(file);
  const auto header = parse_header(lines, file);
  if (!header.is_samples) {
    throw ConfigError("'" + file + "': not a sample batch file");
  }
  LimitSampleBatch batch;
  batch.kind = header.kind;
  batch.model_ref = header.model;
  batch.n_mc = header.n_mc;
  batch.seed = header.seed;
  batch.y_grid = header.y_grid;
  batch.x_grid = header.x_grid;
  batch.samples.reserve(header.n_mc);
  for (std::size_t i = header.first_data_line; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const double v = parse_double(lines[i]);
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("'" + file + "': invalid sample value");
    }
    batch.samples.push_back(v);
  }
  if (batch.samples.size() != batch.n_mc) {
    throw ConfigError("'" + file + "': sample count disagrees with n_mc");
  }
  return batch;
}

}  // namespace cvmshift
