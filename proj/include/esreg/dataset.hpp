#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace esreg {

using AbsentMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Design matrix plus response with row-level completeness flags and a
// cell-level absence mask. Columns are partitioned into an always-observed
// block and a possibly-missing block. Values stored in absent cells are
// meaningless placeholders: no numeric routine may read them, and
// fill_absent() exists so tests can verify that.
class Dataset {
 public:
  // missing_block lists the columns that may contain absent cells
  // (0-based, strictly ascending). It may name columns with no absent
  // cell in this particular sample, but every absent cell must lie in a
  // missing_block column of an incomplete row.
  Dataset(Eigen::VectorXd response, Eigen::MatrixXd design,
          std::vector<std::uint8_t> complete_flags, AbsentMask absent,
          std::vector<int> missing_block,
          std::vector<std::string> column_names = {});

  // Fully observed dataset: all rows complete, empty missing block.
  static Dataset complete(Eigen::VectorXd response, Eigen::MatrixXd design,
                          std::vector<std::string> column_names = {});

  Eigen::Index n_rows() const { return design_.rows(); }
  Eigen::Index n_cols() const { return design_.cols(); }

  const Eigen::VectorXd& responses() const { return response_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const AbsentMask& absent_mask() const { return absent_; }

  bool is_complete(Eigen::Index i) const { return flags_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<std::uint8_t>& complete_flags() const { return flags_; }
  Eigen::Index complete_count() const { return complete_count_; }

  bool is_absent(Eigen::Index i, Eigen::Index j) const { return absent_(i, j); }

  const std::vector<int>& observed_block() const { return observed_block_; }
  const std::vector<int>& missing_block() const { return missing_block_; }
  const std::vector<std::string>& column_names() const { return names_; }

  // Overwrites the placeholder value in every absent cell; observed cells
  // are untouched. Results of all numeric routines must be bit-for-bit
  // invariant under this operation.
  void fill_absent(double v);

  // New dataset restricted to the given columns (0-based into this
  // dataset, in the requested order). Completeness flags and the block
  // partition are recomputed with respect to the kept columns.
  Dataset subset_columns(const std::vector<int>& cols) const;

  // New dataset restricted to the given rows (in the requested order).
  // The column block partition is unchanged.
  Dataset subset_rows(const std::vector<int>& rows) const;

 private:
  Eigen::VectorXd response_;
  Eigen::MatrixXd design_;
  std::vector<std::uint8_t> flags_;
  AbsentMask absent_;
  std::vector<int> observed_block_;
  std::vector<int> missing_block_;
  std::vector<std::string> names_;
  Eigen::Index complete_count_ = 0;
};

// Default column names x1..xd (1-based suffixes, as in emitted files).
std::vector<std::string> default_column_names(Eigen::Index d);

}  // namespace esreg
