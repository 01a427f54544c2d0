#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esreg/dataset.hpp"
#include "esreg/rng.hpp"

namespace esreg {

// Shortest decimal form that round-trips the exact double ("%.17g" style).
std::string format_double(double v);

// Writes contents to a temporary file in the target directory and renames
// it into place, so readers never observe a partial file. Throws DataError
// on any filesystem failure (the temporary is removed).
void atomic_write_file(const std::string& path, const std::string& contents);

// Reads a comma-separated file with a mandatory header row. Cells equal to
// na_token (or empty) become absent; a row with any absent cell is flagged
// incomplete; the missing block is the set of columns containing at least
// one absent cell. The response column must be fully observed. Parse
// problems report the offending row and column. Throws DataError.
Dataset ingest_csv(const std::string& path, const std::string& response_column,
                   const std::string& na_token = "NA");

// Inverse of ingest_csv: header then rows, response column first, doubles
// in round-trip precision, absent cells as na_token.
void emit_csv(const Dataset& data, const std::string& path,
              const std::string& response_name = "y",
              const std::string& na_token = "NA");

struct ScreeningResult {
  std::vector<int> columns;             // selected, by descending |corr|
  std::vector<std::string> names;
  std::vector<double> abs_correlations; // aligned with columns
  long subsample_size = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;    // columns excluded and why
};

// Draws subsample_size columns uniformly without replacement, computes the
// absolute Pearson correlation of each with the response over the rows
// where that column is observed, and keeps the top k (ties broken by
// ascending column index). Columns with fewer than three observed pairs
// are excluded with a warning; zero-variance columns count as correlation
// zero. Throws if fewer than k usable columns remain.
ScreeningResult screen_columns(const Dataset& data, int k, long subsample_size,
                               Rng& rng);

}  // namespace esreg
