#include "pai/dataset.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "pai/errors.hpp"
#include "pai/special.hpp"

namespace pai {

namespace {

using Eigen::Index;

constexpr std::size_t kSide = 32;
constexpr std::size_t kPlane = kSide * kSide;

std::vector<double> decode_pixels(const unsigned char* px, bool grey16) {
  if (!grey16) {
    std::vector<double> out(3 * kPlane);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = px[k] / 255.0;
    return out;
  }
  std::vector<double> out(kPlane / 4, 0.0);
  for (std::size_t r = 0; r < kSide; ++r)
    for (std::size_t c = 0; c < kSide; ++c) {
      const std::size_t p = r * kSide + c;
      const double grey = (px[p] + px[kPlane + p] + px[2 * kPlane + p]) / (3.0 * 255.0);
      out[(r / 2) * (kSide / 2) + c / 2] += 0.25 * grey;
    }
  return out;
}

void standardize_columns(Eigen::MatrixXd& x) {
  const double m = static_cast<double>(x.rows());
  for (Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / m);
    if (sd > 0.0) col /= sd;
  }
}

}  // namespace

std::string_view source_name(DataSource s) noexcept {
  return s == DataSource::SyntheticGaussian ? "synthetic-gaussian" : "cifar10-binary";
}

Dataset load_cifar10_binary(const std::vector<std::filesystem::path>& paths, int c0, int c1,
                            std::size_t limit, const CifarOptions& options) {
  if (limit == 0) throw ArgumentError("load_cifar10_binary: limit 0 gives an empty dataset");
  if (c0 == c1) throw ArgumentError("load_cifar10_binary: the two classes must differ");
  if (c0 < 0 || c0 > 255 || c1 < 0 || c1 > 255)
    throw ArgumentError("load_cifar10_binary: class labels must fit in a byte");

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::array<unsigned char, kCifarRecordBytes> record{};
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::size_t offset = 0;
    while (rows.size() < limit) {
      in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(record.size()));
      const auto got = static_cast<std::size_t>(in.gcount());
      if (got == 0) break;
      if (got < record.size())
        throw FormatError("truncated CIFAR-10 record in " + path.string(), offset);
      offset += got;
      const int label = record[0];
      if (label != c0 && label != c1) continue;
      rows.push_back(decode_pixels(record.data() + 1, options.grey16));
      labels.push_back(label == c0 ? -1.0 : 1.0);
    }
    if (in.bad()) throw IoError("read error in " + path.string());
    if (rows.size() >= limit) break;
  }
  if (rows.empty()) throw ArgumentError("load_cifar10_binary: no records with the requested classes");

  Dataset data;
  data.source = DataSource::Cifar10Binary;
  const auto m = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(rows.front().size());
  data.X.resize(m, d);
  data.y.resize(m);
  for (Index i = 0; i < m; ++i) {
    data.X.row(i) = Eigen::Map<const Eigen::RowVectorXd>(rows[static_cast<std::size_t>(i)].data(), d);
    data.y[i] = labels[static_cast<std::size_t>(i)];
  }
  if (options.standardize) standardize_columns(data.X);
  return data;
}

Dataset synth_gaussian(std::size_t m, std::size_t d, double separation, Rng64& rng) {
  if (m == 0 || m % 2 != 0) throw ArgumentError("synth_gaussian: m must be even and positive");
  if (d == 0) throw ArgumentError("synth_gaussian: d must be positive");
  const auto mi = static_cast<Index>(m);
  const auto di = static_cast<Index>(d);
  const double shift = separation / std::sqrt(static_cast<double>(d));
  Eigen::MatrixXd x(mi, di);
  Eigen::VectorXd y(mi);
  for (Index i = 0; i < mi; ++i) {
    y[i] = i < mi / 2 ? 1.0 : -1.0;
    for (Index j = 0; j < di; ++j) x(i, j) = y[i] * shift + rng.normal();
  }
  Dataset data;
  data.X.resize(mi, di);
  data.y.resize(mi);
  std::vector<Index> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<Index>(i);
  for (std::size_t i = m - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  for (Index i = 0; i < mi; ++i) {
    data.X.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    data.y[i] = y[order[static_cast<std::size_t>(i)]];
  }
  data.source = DataSource::SyntheticGaussian;
  return data;
}

Dataset flip_labels(const Dataset& data, double fraction, Rng64& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ArgumentError("flip_labels: fraction must lie in [0, 1]");
  if (data.noise_fraction != 0.0) throw ContractError("flip_labels: labels were already flipped");
  Dataset out = data;
  out.noise_fraction = fraction;
  const std::size_t m = data.size();
  const std::size_t k = top_count(fraction, m);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.below(m - i)]);
    out.y[static_cast<Index>(order[i])] = -out.y[static_cast<Index>(order[i])];
  }
  return out;
}

}  // namespace pai
