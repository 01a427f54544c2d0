#include "esreg/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "esreg/errors.hpp"

namespace esreg {
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("failed while writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ec2;
    fs::remove(tmp, ec2);
    throw DataError("cannot move temporary file into place at '" + path +
                    "': " + ec.message());
  }
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
  const std::string cell = trim(raw);
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw DataError("cannot parse '" + cell + "' as a number at row " +
                    std::to_string(row) + ", column '" + column + "'");
  if (errno == ERANGE && !std::isfinite(v))
    throw DataError("value out of range at row " + std::to_string(row) +
                    ", column '" + column + "'");
  return v;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& response_column,
                   const std::string& na_token) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty; a header row is required");
  std::vector<std::string> header = split_csv_line(line);
  for (auto& name : header) name = trim(name);

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) throw DataError("empty column name in the header of '" + path + "'");
    if (!seen.emplace(header[j], j).second)
      throw DataError("duplicate column name '" + header[j] + "' in '" + path + "'");
  }
  const auto it = seen.find(response_column);
  if (it == seen.end())
    throw DataError("response column '" + response_column + "' not found in '" + path + "'");
  const std::size_t y_col = it->second;

  std::vector<std::vector<double>> values;  // per data row, design cells only
  std::vector<std::vector<bool>> absent_rows;
  std::vector<double> y;
  std::size_t row = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;  // allow a trailing blank line
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    std::vector<double> design_row;
    std::vector<bool> absent_row;
    design_row.reserve(header.size() - 1);
    absent_row.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const std::string cell = trim(cells[j]);
      const bool is_absent = cell.empty() || cell == na_token;
      if (j == y_col) {
        if (is_absent)
          throw DataError("response value is absent at row " + std::to_string(row));
        y.push_back(parse_cell(cell, row, header[j]));
      } else if (is_absent) {
        design_row.push_back(std::numeric_limits<double>::quiet_NaN());
        absent_row.push_back(true);
      } else {
        design_row.push_back(parse_cell(cell, row, header[j]));
        absent_row.push_back(false);
      }
    }
    values.push_back(std::move(design_row));
    absent_rows.push_back(std::move(absent_row));
  }

  const auto n = static_cast<Eigen::Index>(values.size());
  if (n == 0) throw DataError("'" + path + "' contains a header but no data rows");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  if (d == 0) throw DataError("'" + path + "' has no covariate columns");

  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != y_col) names.push_back(header[j]);
  }

  Eigen::VectorXd response(n);
  Eigen::MatrixXd design(n, d);
  AbsentMask absent = AbsentMask::Constant(n, d, false);
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  std::vector<char> col_has_hole(static_cast<std::size_t>(d), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    response(i) = y[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      design(i, j) = values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (absent_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        absent(i, j) = true;
        flags[static_cast<std::size_t>(i)] = 0;
        col_has_hole[static_cast<std::size_t>(j)] = 1;
      }
    }
  }
  std::vector<int> missing_block;
  for (int j = 0; j < static_cast<int>(d); ++j) {
    if (col_has_hole[static_cast<std::size_t>(j)]) missing_block.push_back(j);
  }
  return Dataset(std::move(response), std::move(design), std::move(flags),
                 std::move(absent), std::move(missing_block), std::move(names));
}

void emit_csv(const Dataset& data, const std::string& path,
              const std::string& response_name, const std::string& na_token) {
  for (const auto& name : data.column_names()) {
    if (name == response_name)
      throw std::invalid_argument("response name '" + response_name +
                                  "' collides with a covariate column");
  }
  std::ostringstream os;
  os << response_name;
  for (const auto& name : data.column_names()) os << ',' << name;
  os << '\n';
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    os << format_double(data.responses()(i));
    for (Eigen::Index j = 0; j < data.n_cols(); ++j) {
      os << ',';
      if (data.is_absent(i, j)) {
        os << na_token;
      } else {
        os << format_double(data.design()(i, j));
      }
    }
    os << '\n';
  }
  atomic_write_file(path, os.str());
}

ScreeningResult screen_columns(const Dataset& data, int k, long subsample_size,
                               Rng& rng) {
  const auto d = static_cast<long>(data.n_cols());
  if (k < 1) throw std::invalid_argument("screening size must be positive");
  if (subsample_size < 1 || subsample_size > d)
    throw std::invalid_argument("subsample size must lie in [1, column count]");
  if (k > subsample_size)
    throw std::invalid_argument("screening size cannot exceed the subsample size");

  // Partial Fisher-Yates: the first subsample_size entries are a uniform
  // draw without replacement.
  std::vector<int> pool(static_cast<std::size_t>(d));
  for (long j = 0; j < d; ++j) pool[static_cast<std::size_t>(j)] = static_cast<int>(j);
  for (long j = 0; j < subsample_size; ++j) {
    const auto span = static_cast<std::uint64_t>(d - j);
    const auto pick = j + static_cast<long>(rng.next_u64() % span);
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
  }
  std::vector<int> drawn(pool.begin(), pool.begin() + subsample_size);
  std::sort(drawn.begin(), drawn.end());

  ScreeningResult out;
  out.subsample_size = subsample_size;

  struct Scored {
    int column;
    double abs_corr;
  };
  std::vector<Scored> scored;
  scored.reserve(drawn.size());
  for (int c : drawn) {
    // Pairwise-complete Pearson correlation with the response.
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    long m = 0;
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
      if (data.is_absent(i, c)) continue;
      const double x = data.design()(i, c);
      const double yv = data.responses()(i);
      sx += x;
      sy += yv;
      sxx += x * x;
      syy += yv * yv;
      sxy += x * yv;
      ++m;
    }
    if (m < 3) {
      out.warnings.push_back("column '" + data.column_names()[static_cast<std::size_t>(c)] +
                             "' excluded: only " + std::to_string(m) +
                             " observed pairs");
      continue;
    }
    const double md = static_cast<double>(m);
    const double vx = sxx - sx * sx / md;
    const double vy = syy - sy * sy / md;
    double corr = 0.0;
    if (vx > 0.0 && vy > 0.0) corr = (sxy - sx * sy / md) / std::sqrt(vx * vy);
    scored.push_back({c, std::fabs(corr)});
  }

  if (static_cast<int>(scored.size()) < k)
    throw DataError("screening cannot keep " + std::to_string(k) + " columns: only " +
                    std::to_string(scored.size()) + " usable after exclusions");

  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.abs_corr != b.abs_corr) return a.abs_corr > b.abs_corr;
    return a.column < b.column;
  });
  for (int i = 0; i < k; ++i) {
    out.columns.push_back(scored[static_cast<std::size_t>(i)].column);
    out.names.push_back(
        data.column_names()[static_cast<std::size_t>(scored[static_cast<std::size_t>(i)].column)]);
    out.abs_correlations.push_back(scored[static_cast<std::size_t>(i)].abs_corr);
  }
  return out;
}

}  // namespace esreg
