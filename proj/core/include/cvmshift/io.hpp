#pragma once

#include <string>

#include "cvmshift/invariant_law.hpp"
#include "cvmshift/limit_mc.hpp"
#include "cvmshift/simulate.hpp"

namespace cvmshift {

/// Shortest representation that round-trips exactly.
std::string format_double(double v);

/// Fixed 17-significant-digit representation (path CSV convention).
std::string format_double_17(double v);

double parse_double(const std::string& s);

/// Path CSV: one header line `# dt=<dt> theta0=<v|NA> seed=<s>`, then one
/// value per line with 17 significant digits.
void write_path_csv(const Path& path, const std::string& file);
Path read_path_csv(const std::string& file);

/// Law export: `# G=... I=... A=... gamma=...` then `x,f,F` rows.
void export_law_csv(const InvariantLaw& law, const std::string& file);

/// Quantile table: versioned text, `version=1`, `kind=`, `model=`, `n_mc=`,
/// `seed=`, `grid=`, then `epsilon,threshold` rows, then `crc32=` over the
/// preceding bytes.
void save_table(const QuantileTable& table, const std::string& file);
QuantileTable load_table(const std::string& file);

/// Sample batch: same scheme with an extra `content=samples` header and one
/// sample per row.
void save_batch(const LimitSampleBatch& batch, const std::string& file);
LimitSampleBatch load_batch(const std::string& file);

}  // namespace cvmshift
