#pragma once

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pai/rng.hpp"

namespace pai {

enum class DataSource { SyntheticGaussian, Cifar10Binary };

std::string_view source_name(DataSource s) noexcept;

/// Labelled samples, one row of X per sample, labels in {-1, +1}.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  DataSource source = DataSource::SyntheticGaussian;
  double noise_fraction = 0.0;  ///< fraction of labels flipped after loading

  std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

/// Bytes per CIFAR-10 binary record: label byte plus 32x32x3 channel-major pixels.
inline constexpr std::size_t kCifarRecordBytes = 3073;

struct CifarOptions {
  bool grey16 = false;       ///< RGB mean, then 2x2 mean pooling to 16x16 (d = 256)
  bool standardize = false;  ///< per-feature zero mean, unit variance (constant features only centred)
};

/// Reads records from `paths` in order, keeping labels c0 (-> -1) and c1 (-> +1)
/// until `limit` records are kept. Pixels are scaled to [0, 1].
/// Throws ArgumentError for limit = 0, c0 = c1 or an empty result, IoError for
/// unreadable files and FormatError at the offset of a truncated record.
Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths, int c0, int c1,
                            std::size_t limit, const CifarOptions& options = {});

/// m/2 samples of N(+s/sqrt(d) 1, I) labelled +1 and m/2 of N(-s/sqrt(d) 1, I)
/// labelled -1, in Fisher-Yates shuffled order. Throws ArgumentError for odd or zero m.
Dataset synth_gaussian(std::size_t m, std::size_t d, double separation, Rng64& rng);

/// Negates floor(fraction * m) labels chosen uniformly without replacement.
/// Throws ArgumentError for a fraction outside [0, 1] and ContractError when
/// the dataset already carries flipped labels.
Dataset flip_labels(const Dataset& data, double fraction, Rng64& rng);

}  // namespace pai
