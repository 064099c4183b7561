#include "umot/discrete_operator.hpp"

#include <algorithm>

#include "umot/error.hpp"

namespace umot {
namespace {

std::vector<Block> validated_blocks(std::vector<Block> blocks, std::size_t cols) {
  if (blocks.empty()) return {Block{"all", 0, cols}};
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& a, const Block& b) { return a.begin < b.begin; });
  std::size_t next = 0;
  for (const Block& b : blocks) {
    require(b.begin == next && b.end >= b.begin, ErrorCode::InvalidArgument,
            "column blocks must partition the column range (block '" + b.name + "')");
    next = b.end;
  }
  require(next == cols, ErrorCode::InvalidArgument, "column blocks do not cover every column");
  return blocks;
}

}  // namespace

DiscreteOperator::DiscreteOperator(std::size_t rows, std::size_t cols,
                                   const std::vector<Triplet>& triplets, std::vector<Block> blocks)
    : matrix_(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)) {
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
  blocks_ = validated_blocks(std::move(blocks), cols);
}

DiscreteOperator::DiscreteOperator(SparseMatrix matrix, std::vector<Block> blocks)
    : matrix_(std::move(matrix)) {
  matrix_.makeCompressed();
  blocks_ = validated_blocks(std::move(blocks), static_cast<std::size_t>(matrix_.cols()));
}

const Block& DiscreteOperator::block(const std::string& name) const {
  for (const Block& b : blocks_)
    if (b.name == name) return b;
  fail(ErrorCode::InvalidArgument, "operator has no column block '" + name + "'");
}

Eigen::VectorXd DiscreteOperator::apply(const Eigen::VectorXd& x) const {
  require(static_cast<std::size_t>(x.size()) == cols(), ErrorCode::InvalidArgument,
          "operator input size mismatch");
  return matrix_ * x;
}

Eigen::VectorXd DiscreteOperator::apply_transpose(const Eigen::VectorXd& y) const {
  require(static_cast<std::size_t>(y.size()) == rows(), ErrorCode::InvalidArgument,
          "operator transpose input size mismatch");
  return matrix_.transpose() * y;
}

DiscreteOperator DiscreteOperator::transpose() const {
  return DiscreteOperator(SparseMatrix(matrix_.transpose()));
}

DiscreteOperator DiscreteOperator::compose(const DiscreteOperator& rhs) const {
  require(cols() == rhs.rows(), ErrorCode::InvalidArgument, "operator composition size mismatch");
  return DiscreteOperator(SparseMatrix(matrix_ * rhs.matrix_), rhs.blocks_);
}

double DiscreteOperator::coeff(std::size_t row, std::size_t col) const {
  return matrix_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

DiscreteOperator operator+(const DiscreteOperator& a, const DiscreteOperator& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::InvalidArgument,
          "operator sum size mismatch");
  return DiscreteOperator(SparseMatrix(a.matrix_ + b.matrix_), a.blocks_);
}

DiscreteOperator operator*(double s, const DiscreteOperator& a) {
  return DiscreteOperator(SparseMatrix(s * a.matrix_), a.blocks_);
}

DiscreteOperator vstack(const std::vector<DiscreteOperator>& parts) {
  require(!parts.empty(), ErrorCode::InvalidArgument, "vstack needs at least one operator");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  std::size_t nnz = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, ErrorCode::InvalidArgument, "vstack column mismatch");
    rows += p.rows();
    nnz += p.nonzeros();
  }
  std::vector<Triplet> t;
  t.reserve(nnz);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const SparseMatrix& m = p.matrix();
    for (Eigen::Index r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it)
        t.emplace_back(static_cast<int>(offset + static_cast<std::size_t>(it.row())),
                       static_cast<int>(it.col()), it.value());
    offset += p.rows();
  }
  return DiscreteOperator(rows, cols, t, parts.front().blocks());
}

}  // namespace umot
