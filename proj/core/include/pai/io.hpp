#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pai/grid.hpp"

namespace pai {

/// 17 significant digits (general format), '.' decimal point, independent
/// of the locale. NaN and infinities print as nan, inf, -inf.
std::string format_double(double v);

/// CSV with a fixed header; cells are already formatted text.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);  ///< throws ArgumentError on a width mismatch
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  /// Comma separated, '\n' line endings, header first.
  std::string text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(std::string_view v);

/// Writes bytes verbatim; throws IoError with the path on failure.
void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Binary P5, maxval 255, byte round(255 clamp(w, 0, 1)), row iu = u ascending.
std::string pgm_bytes(const GridKernel& w);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

using ConfigMap = std::map<std::string, std::string>;

/// Flat key=value lines; blank lines and lines starting with '#' are
/// ignored, keys and values are trimmed. Throws FormatError at the offset
/// of a line without '=' or with an empty key.
ConfigMap parse_config(std::string_view text);

/// "key=value\n" for each key in ascending order, skipping `excluded`.
std::string canonical_config(const ConfigMap& config, const std::vector<std::string>& excluded = {});

/// Numeric CSV without header; rows of equal length. Throws FormatError at
/// the offset of a bad number or a ragged row.
Eigen::MatrixXd parse_csv_matrix(std::string_view text);

}  // namespace pai
