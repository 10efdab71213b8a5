#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pai/io.hpp"

namespace paigraph {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumeric = 3, kIo = 4 };

/// Options every subcommand accepts.
struct Common {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::string config;
};

void add_common(CLI::App& sub, Common& common);

/// Output directory, manifest and the effective configuration of one run.
class Run {
 public:
  /// `effective` holds every parameter that influences the data outputs.
  Run(std::string command, const Common& common, pai::ConfigMap effective);

  void write(const std::string& name, std::string_view bytes);
  void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }
  std::uint64_t config_hash() const noexcept { return hash_; }

  /// Writes manifest.json.
  void finish();

 private:
  std::string command_;
  std::filesystem::path dir_;
  std::uint64_t seed_;
  pai::ConfigMap config_;
  std::uint64_t hash_;
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json notes_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

std::string join(const std::vector<double>& v);
std::string join(const std::vector<std::size_t>& v);
std::string join(const std::vector<std::string>& v);

// Subcommand registration; each sets its own callback.
void add_converge(CLI::App& app, Common& common);
void add_graphon(CLI::App& app, Common& common);
void add_pathdensity(CLI::App& app, Common& common);
void add_ntk(CLI::App& app, Common& common);
void add_densecore(CLI::App& app, Common& common);
void add_uat(CLI::App& app, Common& common);
void add_cutnorm(CLI::App& app, Common& common);

/// argv with the keys of a --config file inserted ahead of the user's flags
/// for every option the user did not pass. Throws ArgumentError for keys the
/// subcommand does not know.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args);

}  // namespace paigraph
