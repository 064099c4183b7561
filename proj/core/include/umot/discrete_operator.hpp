#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace umot {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Named contiguous range of operator columns (one unknown field).
struct Block {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  friend bool operator==(const Block&, const Block&) = default;
};

/// Sparse linear map between stacked-field spaces. Duplicate triplets are
/// summed at construction and the column blocks must partition [0, cols).
class DiscreteOperator {
 public:
  DiscreteOperator() = default;
  DiscreteOperator(std::size_t rows, std::size_t cols, const std::vector<Triplet>& triplets,
                   std::vector<Block> blocks = {});
  DiscreteOperator(SparseMatrix matrix, std::vector<Block> blocks = {});

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  [[nodiscard]] std::size_t nonzeros() const noexcept {
    return static_cast<std::size_t>(matrix_.nonZeros());
  }
  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }
  /// Throws InvalidArgument for an unknown block name.
  [[nodiscard]] const Block& block(const std::string& name) const;

  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;
  [[nodiscard]] DiscreteOperator transpose() const;
  /// Product this * rhs; keeps the column blocks of rhs.
  [[nodiscard]] DiscreteOperator compose(const DiscreteOperator& rhs) const;
  /// Coefficient at (row, col); zero when not stored.
  [[nodiscard]] double coeff(std::size_t row, std::size_t col) const;

  friend DiscreteOperator operator+(const DiscreteOperator& a, const DiscreteOperator& b);
  friend DiscreteOperator operator*(double s, const DiscreteOperator& a);

 private:
  SparseMatrix matrix_;
  std::vector<Block> blocks_;
};

/// Rows of `blocks` stacked vertically, columns shared.
DiscreteOperator vstack(const std::vector<DiscreteOperator>& parts);

}  // namespace umot
