#include "pai/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pai/errors.hpp"

namespace pai {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ArgumentError("CsvTable: empty header");
}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw ArgumentError("CsvTable: row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::text() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string cell(double v) { return format_double(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(std::string_view v) { return std::string(v); }

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return data;
}

std::string pgm_bytes(const GridKernel& w) {
  const std::size_t g = w.size();
  std::string out = "P5\n" + std::to_string(g) + " " + std::to_string(g) + "\n255\n";
  out.reserve(out.size() + g * g);
  for (std::size_t iu = 0; iu < g; ++iu)
    for (std::size_t iv = 0; iv < g; ++iv) {
      const double v = std::clamp(w(iu, iv), 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v)));
    }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  const auto res = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t offset = 0;
  while (offset < text.size()) {
    auto end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(offset, end - offset));
    if (!line.empty() && line.front() != '#') {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw FormatError("config line without '='", offset);
      const auto key = trim(line.substr(0, eq));
      if (key.empty()) throw FormatError("config line with an empty key", offset);
      out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
    }
    offset = end + 1;
  }
  return out;
}

std::string canonical_config(const ConfigMap& config, const std::vector<std::string>& excluded) {
  std::string out;
  for (const auto& [k, v] : config) {
    if (std::find(excluded.begin(), excluded.end(), k) != excluded.end()) continue;
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd parse_csv_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t offset = 0;
  while (offset < text.size()) {
    auto end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(offset, end - offset));
    if (!line.empty()) {
      std::vector<double> r;
      std::size_t pos = 0;
      while (true) {
        auto comma = line.find(',', pos);
        const std::string_view field = trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos));
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        const std::size_t at = field.empty() ? offset : static_cast<std::size_t>(field.data() - text.data());
        if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size())
          throw FormatError("bad number in CSV matrix", at);
        r.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      if (!rows.empty() && r.size() != rows.front().size())
        throw FormatError("ragged row in CSV matrix", offset);
      rows.push_back(std::move(r));
    }
    offset = end + 1;
  }
  if (rows.empty()) throw FormatError("empty CSV matrix", 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace pai
