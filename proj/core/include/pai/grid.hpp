#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace pai {

/// A G x G kernel sampled on cell centres u = (iu + 1/2)/G, v = (iv + 1/2)/G.
/// Rows index u (input side), columns index v (neuron side).
class GridKernel {
 public:
  GridKernel() = default;
  explicit GridKernel(Eigen::MatrixXd cells);
  static GridKernel constant(std::size_t g, double value);

  std::size_t size() const noexcept { return static_cast<std::size_t>(cells_.rows()); }
  double operator()(std::size_t iu, std::size_t iv) const {
    return cells_(static_cast<Eigen::Index>(iu), static_cast<Eigen::Index>(iv));
  }
  const Eigen::MatrixXd& cells() const noexcept { return cells_; }

  double mean() const { return cells_.mean(); }
  double min() const { return cells_.minCoeff(); }
  double max() const { return cells_.maxCoeff(); }
  GridKernel transposed() const { return GridKernel(cells_.transpose()); }

  static double center(std::size_t i, std::size_t g) noexcept {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(g);
  }

 private:
  Eigen::MatrixXd cells_;
};

/// Half-open index range [begin, end) of one pooling block.
struct Block {
  std::size_t begin;
  std::size_t end;
};

/// Splits [0, n) into g contiguous blocks whose sizes differ by at most one,
/// larger blocks first.
std::vector<Block> partition_blocks(std::size_t n, std::size_t g);

/// Block-averages a d x n matrix onto a g x g grid. Requires d >= g and n >= g.
GridKernel pool_to_grid(const Eigen::MatrixXd& p, std::size_t g);

}  // namespace pai
