// ntk, densecore, uat and cutnorm subcommands.
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "pai/cut.hpp"
#include "pai/errors.hpp"
#include "pai/ntk.hpp"
#include "pai/uat.hpp"
#include "run.hpp"

namespace paigraph {

namespace {

using pai::cell;

// ntk ---------------------------------------------------------------------

struct NtkFlags {
  std::string data = "synthetic";
  std::size_t m = 200;
  std::size_t d = 64;
  double separation = 2.0;
  std::vector<int> classes{0, 1};
  std::size_t limit = 200;
  bool grey16 = false;
  bool standardize = false;
  std::size_t width = 1024;
  std::size_t depth = 2;
  double rho = 0.2;
  std::string activation = "tanh";
  std::vector<std::string> methods{"snip", "random"};
  std::vector<double> noise_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::size_t seeds = 5;
};

std::vector<std::filesystem::path> cifar_files(const std::string& spec) {
  const std::filesystem::path p(spec);
  if (!std::filesystem::is_directory(p)) {
    if (!std::filesystem::exists(p)) throw pai::IoError("CIFAR-10 file not found: " + p.string());
    return {p};
  }
  std::vector<std::filesystem::path> out;
  for (int b = 1; b <= 5; ++b) {
    auto f = p / ("data_batch_" + std::to_string(b) + ".bin");
    if (std::filesystem::exists(f)) out.push_back(f);
  }
  if (out.empty()) throw pai::IoError("no data_batch_*.bin files in " + p.string());
  return out;
}

void run_ntk(const NtkFlags& f, const Common& common) {
  if (f.classes.size() != 2) throw pai::ArgumentError("--classes needs exactly two labels");
  const bool synthetic = f.data == "synthetic";
  if (!synthetic && f.data.rfind("cifar:", 0) != 0)
    throw pai::ArgumentError("--data must be 'synthetic' or 'cifar:<path>'");
  pai::ConfigMap cfg{{"data", f.data},
                     {"width", cell(f.width)},
                     {"depth", cell(f.depth)},
                     {"rho", cell(f.rho)},
                     {"activation", f.activation},
                     {"methods", join(f.methods)},
                     {"noise-grid", join(f.noise_grid)},
                     {"seeds", cell(f.seeds)}};
  if (synthetic) {
    cfg["m"] = cell(f.m);
    cfg["d"] = cell(f.d);
    cfg["separation"] = cell(f.separation);
  } else {
    cfg["classes"] = std::to_string(f.classes[0]) + "," + std::to_string(f.classes[1]);
    cfg["limit"] = cell(f.limit);
    cfg["grey16"] = f.grey16 ? "true" : "false";
    cfg["standardize"] = f.standardize ? "true" : "false";
  }
  Run run("ntk", common, cfg);

  const pai::Rng64 master(common.seed);
  pai::Dataset data;
  if (synthetic) {
    pai::Rng64 data_rng = master.derive(0);
    data = pai::synth_gaussian(f.m, f.d, f.separation, data_rng);
  } else {
    data = pai::load_cifar10_binary(cifar_files(f.data.substr(6)), f.classes[0], f.classes[1], f.limit,
                                    pai::CifarOptions{f.grey16, f.standardize});
  }
  run.note("samples", data.size());
  run.note("input_dim", data.dim());

  pai::NoiseSweepConfig sc;
  sc.methods.clear();
  for (const auto& m : f.methods) sc.methods.push_back(pai::parse_method(m));
  sc.rho = f.rho;
  sc.width = f.width;
  sc.depth = f.depth;
  sc.noise_grid = f.noise_grid;
  sc.seeds = f.seeds;
  sc.activation = pai::Activation::parse(f.activation);
  const auto rows = pai::noise_sweep(data, sc, master.derive(1));

  pai::CsvTable csv({"row_type", "method", "noise", "seed", "complexity", "std", "jitter"});
  for (const auto& r : rows)
    for (std::size_t s = 0; s < r.values.size(); ++s)
      csv.row({"seed", std::string(pai::method_name(r.method)), cell(r.noise), cell(s), cell(r.values[s]), "", ""});
  for (const auto& r : rows)
    csv.row({"mean", std::string(pai::method_name(r.method)), cell(r.noise), "all", cell(r.mean), cell(r.std),
             cell(r.max_jitter)});
  run.write("ntk.csv", csv.text());
  run.finish();
}

// densecore ---------------------------------------------------------------

struct DenseFlags {
  std::size_t n = 2000;
  std::size_t k = 3;
  double p = 0.5;
  std::size_t trials = 1000;
};

pai::Mask bernoulli_mask(std::size_t rows, std::size_t cols, double p, pai::Rng64& rng) {
  pai::Mask m = pai::Mask::ones(rows, cols);
  for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
    for (Eigen::Index i = 0; i < m.entries.rows(); ++i) m.entries(i, j) = rng.bernoulli(p) ? 1 : 0;
  m.density = p;
  return m;
}

void run_densecore(const DenseFlags& f, const Common& common) {
  Run run("densecore", common,
          {{"n", cell(f.n)}, {"k", cell(f.k)}, {"p", cell(f.p)}, {"trials", cell(f.trials)}});
  const pai::Rng64 master(common.seed);
  std::vector<std::size_t> rows(f.k);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const double expected = static_cast<double>(f.n) * std::pow(f.p, static_cast<double>(f.k));

  pai::CsvTable csv({"trial", "n_good", "reached_half_mean"});
  std::size_t reached = 0;
  for (std::size_t t = 0; t < f.trials; ++t) {
    pai::Rng64 rng = master.derive(t);
    const pai::Mask mask = bernoulli_mask(f.k, f.n, f.p, rng);
    const std::size_t good = pai::count_good_columns(mask, rows);
    const bool ok = static_cast<double>(good) >= 0.5 * expected;
    reached += ok;
    csv.row({cell(t), cell(good), ok ? "1" : "0"});
  }
  run.write("densecore.csv", csv.text());

  const auto pred = pai::chernoff_predictor(static_cast<double>(f.n), 1.0, f.p, f.k);
  pai::CsvTable summary({"n", "k", "p", "trials", "expected", "success_rate", "success_bound", "mu_lower",
                         "fail_prob_upper"});
  summary.row({cell(f.n), cell(f.k), cell(f.p), cell(f.trials), cell(expected),
               cell(static_cast<double>(reached) / static_cast<double>(f.trials)),
               cell(1.0 - std::exp(-expected / 8.0)), cell(pred.mu_lower), cell(pred.fail_prob_upper)});
  run.write("densecore_summary.csv", summary.text());
  run.finish();
}

// uat ---------------------------------------------------------------------

struct UatFlags {
  std::string target = "sincos";
  std::size_t ntilde = 256;
  double rho = 0.2;
  std::size_t width = 0;
  std::size_t train_grid = 41;
  std::size_t test_points = 10000;
  double theta_scale = 2.0;
};

constexpr std::size_t kUatDim = 2;

double target_value(const std::string& name, std::span<const double> u) {
  if (name == "zero") return 0.0;
  return std::sin(3.0 * u[0]) * std::cos(2.0 * u[1]);
}

void run_uat(const UatFlags& f, const Common& common) {
  if (f.target != "sincos" && f.target != "zero") throw pai::ArgumentError("--target must be sincos or zero");
  Run run("uat", common,
          {{"target", f.target},
           {"ntilde", cell(f.ntilde)},
           {"rho", cell(f.rho)},
           {"width", cell(f.width)},
           {"train-grid", cell(f.train_grid)},
           {"test-points", cell(f.test_points)},
           {"theta-scale", cell(f.theta_scale)}});
  const pai::Rng64 master(common.seed);
  const pai::Activation tanh(pai::ActivationKind::Tanh);

  std::vector<std::size_t> widths;
  if (f.width)
    widths.push_back(f.width);
  else
    for (std::size_t w = 512; w <= 16384; w *= 2) widths.push_back(w);

  pai::PrunedNetwork net;
  pai::DenseCore core;
  bool found = false;
  for (std::size_t wi = 0; wi < widths.size() && !found; ++wi) {
    const std::size_t w = widths[wi];
    net = pai::sample_pruned_network(pai::PaiMethod::Snip, pai::NetSpec::one_hidden(w, w, tanh), f.rho, 0.0,
                                     master.derive(1).derive(w));
    try {
      core = pai::count_dense_core(net.masks[0], pai::top_k_rows(net.masks[0].row_factors, kUatDim), f.ntilde);
      found = true;
    } catch (const pai::InsufficientCoreError&) {
      if (wi + 1 == widths.size()) throw;
    }
  }
  const std::size_t width = net.spec.input_dim();

  const pai::Target target = [name = f.target](std::span<const double> u) { return target_value(name, u); };
  pai::Rng64 fit_rng = master.derive(2);
  pai::FitOptions opts;
  opts.theta_scale = f.theta_scale;
  const pai::FeatureApproximator approx =
      pai::fit_k_feature_approximator(target, kUatDim, f.ntilde, f.train_grid, fit_rng, opts);

  const pai::NetSpec spec = pai::NetSpec::one_hidden(width, width, tanh, true);
  const pai::NetParams params = pai::embed_into_mask(spec, net.masks[0], core.rows, core.cols, approx);

  const pai::NetParams effective = pai::apply_masks(spec, params, net.masks);
  pai::Rng64 test_rng = master.derive(3);
  double embed_err = 0.0, masked_err = 0.0, fitted_err = 0.0;
  Eigen::VectorXd x(static_cast<Eigen::Index>(width));
  std::array<double, kUatDim> u{};
  for (std::size_t t = 0; t < f.test_points; ++t) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = test_rng.normal();
    for (std::size_t c = 0; c < kUatDim; ++c) {
      u[c] = test_rng.uniform(-1.0, 1.0);
      x[static_cast<Eigen::Index>(core.rows[c])] = u[c];
    }
    const double out = pai::trace(spec, effective, x).output;
    const double fit = approx(u);
    const double truth = target(u);
    embed_err = std::max(embed_err, std::fabs(out - fit));
    masked_err = std::max(masked_err, std::fabs(out - truth));
    fitted_err = std::max(fitted_err, std::fabs(fit - truth));
  }

  pai::CsvTable csv({"width", "ntilde", "n_good", "rows", "fit_sup_err", "fit_points_err", "embed_max_err",
                     "masked_sup_err"});
  std::vector<std::string> rs;
  for (auto r : core.rows) rs.push_back(std::to_string(r));
  std::string rows_text;
  for (std::size_t i = 0; i < rs.size(); ++i) rows_text += (i ? " " : "") + rs[i];
  csv.row({cell(width), cell(f.ntilde), cell(core.n_good), rows_text, cell(approx.sup_error), cell(fitted_err),
           cell(embed_err), cell(masked_err)});
  run.write("uat.csv", csv.text());
  run.finish();
}

// cutnorm -----------------------------------------------------------------

struct CutFlags {
  std::string input;
  std::vector<std::size_t> random;
  std::string algorithm = "auto";
  std::size_t restarts = 32;
};

std::string index_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + std::to_string(v[i]);
  return out;
}

void run_cutnorm(const CutFlags& f, const Common& common) {
  if (f.input.empty() == f.random.empty()) throw pai::ArgumentError("give exactly one of --input and --random");
  if (!f.random.empty() && f.random.size() != 2) throw pai::ArgumentError("--random takes ROWS,COLS");
  pai::ConfigMap cfg{{"algorithm", f.algorithm}, {"restarts", cell(f.restarts)}};
  std::string text;
  if (!f.input.empty()) {
    text = pai::read_file(f.input);
    cfg["input-fnv1a64"] = pai::hex64(pai::fnv1a64(text));
  } else {
    cfg["random"] = join(f.random);
  }
  Run run("cutnorm", common, cfg);

  const pai::Rng64 master(common.seed);
  Eigen::MatrixXd b;
  if (!f.input.empty()) {
    b = pai::parse_csv_matrix(text);
  } else {
    pai::Rng64 rng = master.derive(0);
    b.resize(static_cast<Eigen::Index>(f.random[0]), static_cast<Eigen::Index>(f.random[1]));
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, j) = rng.normal();
  }
  pai::Rng64 rng = master.derive(1);
  pai::CutResult r;
  if (f.algorithm == "exact")
    r = pai::cut_norm_exact(b);
  else if (f.algorithm == "heuristic")
    r = pai::cut_norm_heuristic(b, f.restarts, rng);
  else if (static_cast<std::size_t>(std::min(b.rows(), b.cols())) <= pai::kExactCutBudget)
    r = pai::cut_norm_exact(b);
  else
    r = pai::cut_norm_heuristic(b, f.restarts, rng);

  pai::CsvTable csv({"rows", "cols", "value", "method", "upper_bound", "row_set", "col_set"});
  csv.row({cell(static_cast<std::size_t>(b.rows())), cell(static_cast<std::size_t>(b.cols())), cell(r.value),
           r.method == pai::CutMethod::Exact ? "exact" : "heuristic", cell(r.upper_bound), index_list(r.rows),
           index_list(r.cols)});
  run.write("cutnorm.csv", csv.text());
  run.finish();
}

}  // namespace

void add_ntk(CLI::App& app, Common& common) {
  auto f = std::make_shared<NtkFlags>();
  auto* sub = app.add_subcommand("ntk", "Graphon-NTK complexity y^T K^-1 y under label noise");
  sub->add_option("--data", f->data, "synthetic or cifar:<file or directory>")->capture_default_str();
  sub->add_option("--m", f->m, "Synthetic sample count (even)")->capture_default_str();
  sub->add_option("--d", f->d, "Synthetic input dimension")->capture_default_str();
  sub->add_option("--separation", f->separation, "Synthetic class separation")->capture_default_str();
  sub->add_option("--classes", f->classes, "CIFAR-10 classes mapped to -1,+1")->delimiter(',')->capture_default_str();
  sub->add_option("--limit", f->limit, "CIFAR-10 records kept")->capture_default_str();
  sub->add_flag("--grey16", f->grey16, "CIFAR-10: grey, mean-pooled to 16x16");
  sub->add_flag("--standardize", f->standardize, "CIFAR-10: per-feature standardisation");
  sub->add_option("--width", f->width, "Hidden width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--depth", f->depth, "Hidden layers")->check(CLI::IsMember({1, 2}))->capture_default_str();
  sub->add_option("--rho", f->rho, "Density")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--activation", f->activation, "Activation")
      ->check(CLI::IsMember({"relu", "tanh", "sigmoid"}))
      ->capture_default_str();
  sub->add_option("--methods", f->methods, "Pruning methods")->delimiter(',')->capture_default_str();
  sub->add_option("--noise-grid", f->noise_grid, "Label-noise fractions")->delimiter(',')->capture_default_str();
  sub->add_option("--seeds", f->seeds, "Seeds")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(*sub, common);
  sub->callback([f, &common] { run_ntk(*f, common); });
}

void add_densecore(CLI::App& app, Common& common) {
  auto f = std::make_shared<DenseFlags>();
  auto* sub = app.add_subcommand("densecore", "Dense-core counts of Bernoulli masks against the Chernoff bound");
  sub->add_option("--n", f->n, "Columns")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--k", f->k, "Rows in the core")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--p", f->p, "Edge probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--trials", f->trials, "Trials")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(*sub, common);
  sub->callback([f, &common] { run_densecore(*f, common); });
}

void add_uat(CLI::App& app, Common& common) {
  auto f = std::make_shared<UatFlags>();
  auto* sub = app.add_subcommand("uat", "Embed a fitted two-coordinate approximator into a SNIP mask");
  sub->add_option("--target", f->target, "sincos: sin(3u1)cos(2u2); zero")->capture_default_str();
  sub->add_option("--ntilde", f->ntilde, "Features")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--rho", f->rho, "Density")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub->add_option("--width", f->width, "Width n = d (0: smallest of 512, 1024, ... with a core)")
      ->capture_default_str();
  sub->add_option("--train-grid", f->train_grid, "Training lattice points per axis")->capture_default_str();
  sub->add_option("--test-points", f->test_points, "Random verification inputs")->capture_default_str();
  sub->add_option("--theta-scale", f->theta_scale, "Feature weight scale")->capture_default_str();
  add_common(*sub, common);
  sub->callback([f, &common] { run_uat(*f, common); });
}

void add_cutnorm(CLI::App& app, Common& common) {
  auto f = std::make_shared<CutFlags>();
  auto* sub = app.add_subcommand("cutnorm", "Cut norm of a matrix");
  sub->add_option("--input", f->input, "Numeric CSV matrix without header");
  sub->add_option("--random", f->random, "ROWS,COLS of a Gaussian matrix drawn from the seed")->delimiter(',');
  sub->add_option("--algorithm", f->algorithm, "auto, exact or heuristic")
      ->check(CLI::IsMember({"auto", "exact", "heuristic"}))
      ->capture_default_str();
  sub->add_option("--restarts", f->restarts, "Heuristic restarts")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(*sub, common);
  sub->callback([f, &common] { run_cutnorm(*f, common); });
}

}  // namespace paigraph
