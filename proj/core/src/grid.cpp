#include "pai/grid.hpp"

#include <vector>

#include "pai/errors.hpp"

namespace pai {

GridKernel::GridKernel(Eigen::MatrixXd cells) : cells_(std::move(cells)) {
  if (cells_.rows() != cells_.cols()) throw ArgumentError("GridKernel: cells must be square");
}

GridKernel GridKernel::constant(std::size_t g, double value) {
  const auto n = static_cast<Eigen::Index>(g);
  return GridKernel(Eigen::MatrixXd::Constant(n, n, value));
}

std::vector<Block> partition_blocks(std::size_t n, std::size_t g) {
  if (g == 0 || n < g) throw ArgumentError("partition_blocks: need 1 <= g <= n");
  std::vector<Block> blocks(g);
  const std::size_t base = n / g;
  const std::size_t extra = n % g;
  std::size_t start = 0;
  for (std::size_t b = 0; b < g; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    blocks[b] = {start, start + len};
    start += len;
  }
  return blocks;
}

GridKernel pool_to_grid(const Eigen::MatrixXd& p, std::size_t g) {
  const auto d = static_cast<std::size_t>(p.rows());
  const auto n = static_cast<std::size_t>(p.cols());
  if (g == 0 || d < g || n < g)
    throw ArgumentError("pool_to_grid: matrix " + std::to_string(d) + "x" + std::to_string(n) +
                        " is smaller than grid " + std::to_string(g));
  const auto rows = partition_blocks(d, g);
  const auto cols = partition_blocks(n, g);
  const auto gi = static_cast<Eigen::Index>(g);
  Eigen::MatrixXd out(gi, gi);
  for (std::size_t bv = 0; bv < g; ++bv) {
    for (std::size_t bu = 0; bu < g; ++bu) {
      const auto r0 = static_cast<Eigen::Index>(rows[bu].begin);
      const auto rl = static_cast<Eigen::Index>(rows[bu].end - rows[bu].begin);
      const auto c0 = static_cast<Eigen::Index>(cols[bv].begin);
      const auto cl = static_cast<Eigen::Index>(cols[bv].end - cols[bv].begin);
      out(static_cast<Eigen::Index>(bu), static_cast<Eigen::Index>(bv)) =
          p.block(r0, c0, rl, cl).mean();
    }
  }
  return GridKernel(std::move(out));
}

}  // namespace pai
