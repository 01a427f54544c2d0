#include "esreg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace esreg {
namespace {

std::string cell_ref(Eigen::Index i, Eigen::Index j) {
  return "row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1);
}

}  // namespace

std::vector<std::string> default_column_names(Eigen::Index d) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

Dataset::Dataset(Eigen::VectorXd response, Eigen::MatrixXd design,
                 std::vector<std::uint8_t> complete_flags, AbsentMask absent,
                 std::vector<int> missing_block, std::vector<std::string> column_names)
    : response_(std::move(response)),
      design_(std::move(design)),
      flags_(std::move(complete_flags)),
      absent_(std::move(absent)),
      missing_block_(std::move(missing_block)),
      names_(std::move(column_names)) {
  const Eigen::Index n = design_.rows();
  const Eigen::Index d = design_.cols();
  if (n < 1 || d < 1) throw std::invalid_argument("dataset must have at least one row and one column");
  if (response_.size() != n) throw std::invalid_argument("response length does not match row count");
  if (static_cast<Eigen::Index>(flags_.size()) != n)
    throw std::invalid_argument("completeness flags length does not match row count");
  if (absent_.rows() != n || absent_.cols() != d)
    throw std::invalid_argument("absence mask shape does not match the design");
  if (names_.empty()) names_ = default_column_names(d);
  if (static_cast<Eigen::Index>(names_.size()) != d)
    throw std::invalid_argument("column name count does not match column count");

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(response_(i)))
      throw std::invalid_argument("response is not finite at row " + std::to_string(i + 1));
  }

  // Validate the block list and build its complement.
  std::vector<char> in_missing(static_cast<std::size_t>(d), 0);
  int prev = -1;
  for (int c : missing_block_) {
    if (c < 0 || c >= d) throw std::invalid_argument("missing block column out of range");
    if (c <= prev) throw std::invalid_argument("missing block must be strictly ascending");
    in_missing[static_cast<std::size_t>(c)] = 1;
    prev = c;
  }
  observed_block_.clear();
  for (int c = 0; c < static_cast<int>(d); ++c) {
    if (!in_missing[static_cast<std::size_t>(c)]) observed_block_.push_back(c);
  }

  // Every absent cell must sit in a missing-block column of an incomplete
  // row; complete rows must be fully observed and all observed cells finite.
  complete_count_ = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool complete = flags_[static_cast<std::size_t>(i)] != 0;
    if (complete) ++complete_count_;
    bool any_absent = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (absent_(i, j)) {
        any_absent = true;
        if (complete)
          throw std::invalid_argument("absent cell in a row flagged complete at " + cell_ref(i, j));
        if (!in_missing[static_cast<std::size_t>(j)])
          throw std::invalid_argument("absent cell outside the missing block at " + cell_ref(i, j));
      } else if (!std::isfinite(design_(i, j))) {
        throw std::invalid_argument("observed design cell is not finite at " + cell_ref(i, j));
      }
    }
    if (!complete && !any_absent)
      throw std::invalid_argument("row " + std::to_string(i + 1) +
                                  " is flagged incomplete but has no absent cell");
  }
}

Dataset Dataset::complete(Eigen::VectorXd response, Eigen::MatrixXd design,
                          std::vector<std::string> column_names) {
  const Eigen::Index n = design.rows();
  const Eigen::Index d = design.cols();
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  AbsentMask absent = AbsentMask::Constant(n, d, false);
  return Dataset(std::move(response), std::move(design), std::move(flags),
                 std::move(absent), {}, std::move(column_names));
}

void Dataset::fill_absent(double v) {
  for (Eigen::Index i = 0; i < design_.rows(); ++i) {
    for (Eigen::Index j = 0; j < design_.cols(); ++j) {
      if (absent_(i, j)) design_(i, j) = v;
    }
  }
}

Dataset Dataset::subset_columns(const std::vector<int>& cols) const {
  if (cols.empty()) throw std::invalid_argument("column subset must be nonempty");
  const Eigen::Index n = n_rows();
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(cols.size()));
  AbsentMask absent(n, static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  names.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const int c = cols[k];
    if (c < 0 || c >= n_cols()) throw std::invalid_argument("column subset index out of range");
    design.col(static_cast<Eigen::Index>(k)) = design_.col(c);
    absent.col(static_cast<Eigen::Index>(k)) = absent_.col(c);
    names.push_back(names_[static_cast<std::size_t>(c)]);
  }

  // Flags and blocks are recomputed for the kept columns: a row is
  // complete when none of the kept cells is absent.
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 1);
  std::vector<int> missing;
  for (Eigen::Index j = 0; j < absent.cols(); ++j) {
    if (absent.col(j).any()) missing.push_back(static_cast<int>(j));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (absent.row(i).any()) flags[static_cast<std::size_t>(i)] = 0;
  }
  return Dataset(response_, std::move(design), std::move(flags), std::move(absent),
                 std::move(missing), std::move(names));
}

Dataset Dataset::subset_rows(const std::vector<int>& rows) const {
  if (rows.empty()) throw std::invalid_argument("row subset must be nonempty");
  const Eigen::Index d = n_cols();
  Eigen::VectorXd response(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), d);
  AbsentMask absent(static_cast<Eigen::Index>(rows.size()), d);
  std::vector<std::uint8_t> flags(rows.size(), 1);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int r = rows[k];
    if (r < 0 || r >= n_rows()) throw std::invalid_argument("row subset index out of range");
    const auto out = static_cast<Eigen::Index>(k);
    response(out) = response_(r);
    design.row(out) = design_.row(r);
    absent.row(out) = absent_.row(r);
    flags[k] = flags_[static_cast<std::size_t>(r)];
  }
  return Dataset(std::move(response), std::move(design), std::move(flags),
                 std::move(absent), missing_block_, names_);
}

}  // namespace esreg
