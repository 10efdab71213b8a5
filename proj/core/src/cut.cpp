#include "pai/cut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "pai/errors.hpp"
#include "pai/limit.hpp"

namespace pai {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::vector<std::size_t> support(const std::vector<char>& flags) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) out.push_back(i);
  return out;
}

CutResult finish(const MatrixXd& b, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                 CutMethod method) {
  CutResult r;
  r.rows = std::move(rows);
  r.cols = std::move(cols);
  r.method = method;
  r.value = evaluate_cut(b, r.rows, r.cols);
  const double dn = static_cast<double>(b.rows()) * static_cast<double>(b.cols());
  r.upper_bound = b.size() ? spectral_norm(b) / std::sqrt(dn) : 0.0;
  return r;
}

// Enumerates row subsets of b (rows <= budget) in Gray-code order.
void exact_over_rows(const MatrixXd& b, std::vector<std::size_t>& best_rows,
                     std::vector<std::size_t>& best_cols) {
  const auto d = static_cast<std::size_t>(b.rows());
  const auto n = static_cast<std::size_t>(b.cols());
  VectorXd r = VectorXd::Zero(idx(n));
  std::vector<char> in(d, 0);
  double best = 0.0;
  std::vector<char> best_in(d, 0);
  int best_sign = 1;
  const std::uint64_t total = std::uint64_t{1} << d;
  for (std::uint64_t k = 1; k < total; ++k) {
    const auto i = static_cast<std::size_t>(std::countr_zero(k));
    if (in[i]) {
      r -= b.row(idx(i)).transpose();
      in[i] = 0;
    } else {
      r += b.row(idx(i)).transpose();
      in[i] = 1;
    }
    double pos = 0.0, neg = 0.0;
    for (Index j = 0; j < r.size(); ++j) {
      if (r[j] > 0.0)
        pos += r[j];
      else
        neg -= r[j];
    }
    if (pos > best) {
      best = pos;
      best_in = in;
      best_sign = 1;
    }
    if (neg > best) {
      best = neg;
      best_in = in;
      best_sign = -1;
    }
  }
  best_rows = support(best_in);
  best_cols.clear();
  if (!best_rows.empty()) {
    VectorXd rr = VectorXd::Zero(idx(n));
    for (auto i : best_rows) rr += b.row(idx(i)).transpose();
    for (std::size_t j = 0; j < n; ++j)
      if (best_sign * rr[idx(j)] > 0.0) best_cols.push_back(j);
    if (best_cols.empty()) best_rows.clear();
  }
}

struct Chain {
  double value = 0.0;
  std::vector<char> rows;
  std::vector<char> cols;
};

Chain alternate(const MatrixXd& b, std::vector<char> rows, double sign) {
  const auto d = static_cast<std::size_t>(b.rows());
  const auto n = static_cast<std::size_t>(b.cols());
  std::vector<char> cols(n, 0);
  VectorXd s(idx(d)), t(idx(n));
  for (int iter = 0; iter < 1000; ++iter) {
    for (std::size_t i = 0; i < d; ++i) s[idx(i)] = rows[i] ? 1.0 : 0.0;
    const VectorXd colsum = b.transpose() * s;
    for (std::size_t j = 0; j < n; ++j) cols[j] = sign * colsum[idx(j)] > 0.0;
    for (std::size_t j = 0; j < n; ++j) t[idx(j)] = cols[j] ? 1.0 : 0.0;
    const VectorXd rowsum = b * t;
    std::vector<char> next(d, 0);
    for (std::size_t i = 0; i < d; ++i) next[i] = sign * rowsum[idx(i)] > 0.0;
    if (next == rows) break;
    rows = std::move(next);
  }
  Chain c;
  c.rows = std::move(rows);
  c.cols = std::move(cols);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (c.cols[j])
      for (std::size_t i = 0; i < d; ++i)
        if (c.rows[i]) sum += b(idx(i), idx(j));
  c.value = sign * sum;
  return c;
}

}  // namespace

double evaluate_cut(const MatrixXd& b, const std::vector<std::size_t>& rows,
                    const std::vector<std::size_t>& cols) {
  if (b.size() == 0) return 0.0;
  double sum = 0.0;
  for (auto i : rows)
    for (auto j : cols) sum += b(idx(i), idx(j));
  const double dn = static_cast<double>(b.rows()) * static_cast<double>(b.cols());
  return std::fabs(sum) / dn;
}

double spectral_norm_power(const MatrixXd& b, int iterations, double tol) {
  if (b.size() == 0) return 0.0;
  Rng64 rng(0x5eedf00dULL);
  VectorXd v(b.cols());
  for (Index j = 0; j < v.size(); ++j) v[j] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    VectorXd w = b.transpose() * (b * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / norm;
    if (std::fabs(next - lambda) <= tol * std::max(1.0, std::fabs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

double spectral_norm(const MatrixXd& b) {
  if (b.size() == 0) return 0.0;
  if (std::min(b.rows(), b.cols()) > 2048) return spectral_norm_power(b);
  const MatrixXd gram = b.rows() <= b.cols() ? MatrixXd(b * b.transpose()) : MatrixXd(b.transpose() * b);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return spectral_norm_power(b);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

CutResult cut_norm_exact(const MatrixXd& b) {
  const auto small = static_cast<std::size_t>(std::min(b.rows(), b.cols()));
  if (small > kExactCutBudget)
    throw BudgetError("cut_norm_exact: min dimension " + std::to_string(small) + " exceeds budget " +
                      std::to_string(kExactCutBudget));
  std::vector<std::size_t> rows, cols;
  if (b.size() == 0) return finish(b, {}, {}, CutMethod::Exact);
  if (b.rows() <= b.cols()) {
    exact_over_rows(b, rows, cols);
  } else {
    const MatrixXd bt = b.transpose();
    exact_over_rows(bt, cols, rows);
  }
  return finish(b, std::move(rows), std::move(cols), CutMethod::Exact);
}

CutResult cut_norm_heuristic(const MatrixXd& b, std::size_t restarts, Rng64& rng) {
  if (restarts == 0) throw ArgumentError("cut_norm_heuristic: need at least one restart");
  const auto d = static_cast<std::size_t>(b.rows());
  Chain best;
  best.rows.assign(d, 0);
  best.cols.assign(static_cast<std::size_t>(b.cols()), 0);
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<char> start(d);
    if (r == 0)
      std::fill(start.begin(), start.end(), 1);
    else
      for (auto& f : start) f = rng.bernoulli(0.5);
    for (double sign : {1.0, -1.0}) {
      Chain c = alternate(b, start, sign);
      if (c.value > best.value) best = std::move(c);
    }
  }
  auto rows = support(best.rows);
  auto cols = support(best.cols);
  if (rows.empty() || cols.empty()) rows.clear(), cols.clear();
  return finish(b, std::move(rows), std::move(cols), CutMethod::Heuristic);
}

CutResult cut_norm(const MatrixXd& b, Rng64& rng) {
  if (static_cast<std::size_t>(std::min(b.rows(), b.cols())) <= kExactCutBudget) return cut_norm_exact(b);
  return cut_norm_heuristic(b, 32, rng);
}

CutResult cut_distance_sorted(const GridKernel& a, const GridKernel& b) {
  if (a.size() != b.size())
    throw ArgumentError("cut_distance_sorted: grid sizes " + std::to_string(a.size()) + " and " +
                        std::to_string(b.size()) + " differ");
  Rng64 rng(0xc07d15ULL);
  return cut_norm(a.cells() - b.cells(), rng);
}

std::vector<GridKernel> theoretical_grids(PaiMethod method, Activation act, double rho,
                                          std::size_t depth, std::size_t grid,
                                          std::size_t resolution, std::size_t mc_samples,
                                          const Rng64& rng, std::vector<double>* taus) {
  if (resolution < grid) resolution = grid;
  std::vector<GridKernel> out;
  for (std::size_t layer = 1; layer <= depth; ++layer) {
    Rng64 layer_rng = rng.derive(layer);
    const LimitModel model = theoretical_model(method, act, mc_samples, layer_rng, layer, depth);
    const double tau = solve_threshold(model, rho, resolution);
    if (taus) taus->push_back(tau);
    const GridKernel fine = evaluate_grid(model.with_tau(tau), resolution);
    out.push_back(pool_to_grid(fine.cells(), grid));
  }
  return out;
}

std::size_t default_theory_resolution(std::size_t grid) {
  return grid * std::max<std::size_t>(1, 512 / std::max<std::size_t>(grid, 1));
}

SweepResult convergence_sweep(const SweepConfig& config, const Rng64& master) {
  if (config.widths.empty()) throw ArgumentError("convergence_sweep: no widths given");
  if (!std::is_sorted(config.widths.begin(), config.widths.end()))
    throw ArgumentError("convergence_sweep: widths must be ascending");
  for (auto w : config.widths)
    if (w < config.grid)
      throw ArgumentError("convergence_sweep: width " + std::to_string(w) + " is smaller than grid " +
                          std::to_string(config.grid));
  if (config.depth != 1 && config.depth != 2)
    throw FeatureError("convergence_sweep: depth must be 1 or 2");

  const std::size_t resolution =
      config.theory_resolution ? config.theory_resolution : default_theory_resolution(config.grid);

  SweepResult result;
  result.theoretical = theoretical_grids(config.method, config.activation, config.rho, config.depth,
                                         config.grid, resolution, config.mc_samples, master.derive(0));

  for (std::size_t w = 0; w < config.widths.size(); ++w) {
    GraphonExperiment exp;
    exp.method = config.method;
    exp.activation = config.activation;
    exp.rho = config.rho;
    exp.width = config.widths[w];
    exp.seeds = config.seeds;
    exp.grid = config.grid;
    exp.label = config.label;
    const Rng64 width_rng = master.derive(1 + w);

    std::vector<GridKernel> layers;
    if (config.depth == 1) {
      layers.push_back(empirical_graphon(exp, width_rng).probs);
    } else {
      auto [l1, l2] = empirical_graphon_deep(exp, width_rng);
      layers.push_back(std::move(l1.probs));
      layers.push_back(std::move(l2.probs));
    }
    const double n = static_cast<double>(exp.width);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const CutResult cut = cut_distance_sorted(layers[l], result.theoretical[l]);
      result.points.push_back(
          SweepPoint{exp.width, l + 1, cut.value, cut.upper_bound, std::sqrt(std::log(2.0 * n) / n)});
    }
    result.empirical.push_back(std::move(layers));
  }
  return result;
}

}  // namespace pai
