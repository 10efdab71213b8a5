#include "run.hpp"

#include <algorithm>

#include "pai/errors.hpp"

#ifndef PAI_VERSION
#define PAI_VERSION "0.0.0"
#endif

namespace paigraph {

void add_common(CLI::App& sub, Common& common) {
  sub.add_option("--out-dir", common.out_dir, "Directory for outputs (created if missing)")->capture_default_str();
  sub.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  sub.add_option("--config", common.config, "Flat key=value file; flags override it");
}

Run::Run(std::string command, const Common& common, pai::ConfigMap effective)
    : command_(std::move(command)),
      dir_(common.out_dir),
      seed_(common.seed),
      config_(std::move(effective)),
      start_(std::chrono::steady_clock::now()) {
  config_["command"] = command_;
  config_["seed"] = std::to_string(seed_);
  hash_ = pai::fnv1a64(pai::canonical_config(config_, {"out-dir", "config"}));
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw pai::IoError("cannot create " + dir_.string() + ": " + ec.message());
}

void Run::write(const std::string& name, std::string_view bytes) {
  pai::write_file(dir_ / name, bytes);
  outputs_.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", pai::hex64(pai::fnv1a64(bytes))}});
}

void Run::finish() {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json m;
  m["command"] = command_;
  m["config_hash"] = pai::hex64(hash_);
  m["config"] = config_;
  m["seed"] = seed_;
  m["tool_version"] = PAI_VERSION;
  m["outputs"] = outputs_;
  m["notes"] = notes_;
  m["wall_clock_seconds"] = seconds;
  pai::write_file(dir_ / "manifest.json", m.dump(2) + "\n");
}

std::string join(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(pai::format_double(x));
  return join(s);
}

std::string join(const std::vector<std::size_t>& v) {
  std::vector<std::string> s;
  for (auto x : v) s.push_back(std::to_string(x));
  return join(s);
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += v[i];
  }
  return out;
}

namespace {

bool passed(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

bool truthy(const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

}  // namespace

std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  // args[0] is the program, args[1] the subcommand.
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  for (const auto* s : app.get_subcommands({}))
    if (s->get_name() == args[1]) sub = s;
  if (!sub) return args;

  const pai::ConfigMap cfg = pai::parse_config(pai::read_file(path));
  std::vector<std::string> out{args[0], args[1]};
  for (const auto& [key, value] : cfg) {
    const std::string flag = "--" + key;
    if (key == "config") continue;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt) throw pai::ArgumentError("config key '" + key + "' is not an option of " + args[1]);
    if (passed(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (truthy(value)) out.push_back(flag);
    } else {
      out.push_back(flag);
      out.push_back(value);
    }
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

}  // namespace paigraph
