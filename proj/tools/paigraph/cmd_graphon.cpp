// converge, graphon and pathdensity subcommands.
#include <memory>

#include "pai/cut.hpp"
#include "pai/errors.hpp"
#include "pai/ntk.hpp"
#include "run.hpp"

namespace paigraph {

namespace {

using pai::cell;

struct GraphonFlags {
  std::string method = "snip";
  std::string activation = "tanh";
  double rho = 0.2;
  std::size_t grid = 32;
  std::size_t depth = 1;
  std::size_t mc_samples = 1'000'000;
  std::size_t resolution = 0;
};

void add_graphon_flags(CLI::App& sub, GraphonFlags& f, bool constant_method) {
  auto* m = sub.add_option("--method", f.method, "Pruning method")->capture_default_str();
  std::vector<std::string> methods{"snip", "grasp-mag", "grasp-signed", "synflow", "magnitude", "random"};
  if (constant_method) methods.push_back("constant");
  m->check(CLI::IsMember(methods));
  sub.add_option("--activation", f.activation, "Activation")
      ->check(CLI::IsMember({"relu", "tanh", "sigmoid"}))
      ->capture_default_str();
  sub.add_option("--rho", f.rho, "Density")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sub.add_option("--grid", f.grid, "Grid size G")->check(CLI::PositiveNumber)->capture_default_str();
  sub.add_option("--mc-samples", f.mc_samples, "Monte Carlo samples of each quantile table")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub.add_option("--theory-resolution", f.resolution,
                 "Resolution of the theoretical kernel before pooling (0: automatic)")
      ->capture_default_str();
}

pai::ConfigMap graphon_config(const GraphonFlags& f) {
  return {{"method", f.method},          {"activation", f.activation},
          {"rho", cell(f.rho)},          {"grid", cell(f.grid)},
          {"depth", cell(f.depth)},      {"mc-samples", cell(f.mc_samples)},
          {"theory-resolution", cell(f.resolution)}};
}

std::string layer_suffix(std::size_t layer) { return layer == 1 ? "" : "_l" + std::to_string(layer); }

// converge ----------------------------------------------------------------

struct ConvergeFlags : GraphonFlags {
  std::vector<std::size_t> widths{128, 256, 512, 1024};
  std::size_t seeds = 50;
  double label = 0.0;
};

void run_converge(const ConvergeFlags& f, const Common& common) {
  pai::ConfigMap cfg = graphon_config(f);
  cfg["widths"] = join(f.widths);
  cfg["seeds"] = cell(f.seeds);
  cfg["label"] = cell(f.label);
  Run run("converge", common, cfg);

  pai::SweepConfig sc;
  sc.method = pai::parse_method(f.method);
  sc.activation = pai::Activation::parse(f.activation);
  sc.rho = f.rho;
  sc.widths = f.widths;
  sc.seeds = f.seeds;
  sc.grid = f.grid;
  sc.depth = f.depth;
  sc.mc_samples = f.mc_samples;
  sc.theory_resolution = f.resolution;
  sc.label = f.label;
  const pai::SweepResult res = pai::convergence_sweep(sc, pai::Rng64(common.seed));

  pai::CsvTable csv({"width", "layer", "distance", "upper_bound", "proxy"});
  for (const auto& p : res.points)
    csv.row({cell(p.width), cell(p.layer), cell(p.distance), cell(p.upper_bound), cell(p.proxy)});
  run.write("converge.csv", csv.text());
  for (std::size_t l = 0; l < res.theoretical.size(); ++l)
    run.write("theoretical" + layer_suffix(l + 1) + ".pgm", pai::pgm_bytes(res.theoretical[l]));
  for (std::size_t w = 0; w < res.empirical.size(); ++w)
    for (std::size_t l = 0; l < res.empirical[w].size(); ++l)
      run.write("empirical_" + std::to_string(f.widths[w]) + layer_suffix(l + 1) + ".pgm",
                pai::pgm_bytes(res.empirical[w][l]));
  run.finish();
}

// graphon -----------------------------------------------------------------

void run_graphon(const GraphonFlags& f, const Common& common) {
  Run run("graphon", common, graphon_config(f));
  std::vector<double> taus;
  const std::size_t res = f.resolution ? f.resolution : pai::default_theory_resolution(f.grid);
  const auto grids = pai::theoretical_grids(pai::parse_method(f.method), pai::Activation::parse(f.activation),
                                            f.rho, f.depth, f.grid, res, f.mc_samples,
                                            pai::Rng64(common.seed).derive(0), &taus);
  pai::CsvTable csv({"layer", "iu", "iv", "u", "v", "value"});
  pai::CsvTable th({"layer", "tau", "density"});
  for (std::size_t l = 0; l < grids.size(); ++l) {
    const auto& g = grids[l];
    for (std::size_t iu = 0; iu < g.size(); ++iu)
      for (std::size_t iv = 0; iv < g.size(); ++iv)
        csv.row({cell(l + 1), cell(iu), cell(iv), cell(pai::GridKernel::center(iu, g.size())),
                 cell(pai::GridKernel::center(iv, g.size())), cell(g(iu, iv))});
    th.row({cell(l + 1), cell(taus[l]), cell(g.mean())});
    run.write("graphon" + layer_suffix(l + 1) + ".pgm", pai::pgm_bytes(g));
  }
  run.write("graphon.csv", csv.text());
  run.write("threshold.csv", th.text());
  run.finish();
}

// pathdensity -------------------------------------------------------------

void run_pathdensity(const GraphonFlags& f, const Common& common) {
  pai::ConfigMap cfg = graphon_config(f);
  cfg.erase("depth");
  Run run("pathdensity", common, cfg);
  pai::GridKernel w1, w2;
  const pai::GridKernel w3 = f.method == "constant" ? pai::GridKernel::constant(f.grid, f.rho)
                                                    : pai::GridKernel::constant(f.grid, 1.0);
  if (f.method == "constant") {
    w1 = w2 = pai::GridKernel::constant(f.grid, f.rho);
  } else {
    const std::size_t res = f.resolution ? f.resolution : pai::default_theory_resolution(f.grid);
    const auto grids = pai::theoretical_grids(pai::parse_method(f.method), pai::Activation::parse(f.activation),
                                              f.rho, 2, f.grid, res, f.mc_samples,
                                              pai::Rng64(common.seed).derive(0));
    // Layer grids are stored [input][neuron]; the contraction wants [neuron][input].
    w1 = grids[0].transposed();
    w2 = grids[1].transposed();
  }
  const Eigen::VectorXd p = pai::path_density(w1, w2, w3);
  pai::CsvTable csv({"i0", "u0", "density"});
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    csv.row({cell(iu), cell(pai::GridKernel::center(iu, f.grid)), cell(p[i])});
  }
  run.write("pathdensity.csv", csv.text());
  run.finish();
}

}  // namespace

void add_converge(CLI::App& app, Common& common) {
  auto flags = std::make_shared<ConvergeFlags>();
  auto* sub = app.add_subcommand("converge", "Cut distance of empirical graphons to the theoretical limit");
  add_graphon_flags(*sub, *flags, false);
  sub->add_option("--widths", flags->widths, "Ascending widths n = d")->delimiter(',')->capture_default_str();
  sub->add_option("--seeds", flags->seeds, "Seeds per width")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--depth", flags->depth, "Hidden layers")->check(CLI::IsMember({1, 2}))->capture_default_str();
  sub->add_option("--label", flags->label, "Scoring label y")->capture_default_str();
  add_common(*sub, common);
  sub->callback([flags, &common] { run_converge(*flags, common); });
}

void add_graphon(CLI::App& app, Common& common) {
  auto flags = std::make_shared<GraphonFlags>();
  flags->grid = 64;
  auto* sub = app.add_subcommand("graphon", "Theoretical limit graphon of a pruning method");
  add_graphon_flags(*sub, *flags, false);
  sub->add_option("--depth", flags->depth, "Hidden layers")->check(CLI::IsMember({1, 2}))->capture_default_str();
  add_common(*sub, common);
  sub->callback([flags, &common] { run_graphon(*flags, common); });
}

void add_pathdensity(CLI::App& app, Common& common) {
  auto flags = std::make_shared<GraphonFlags>();
  flags->grid = 64;
  auto* sub = app.add_subcommand("pathdensity",
                                 "Input-to-output path density of a two-hidden-layer limit (constant: all kernels rho)");
  add_graphon_flags(*sub, *flags, true);
  add_common(*sub, common);
  sub->callback([flags, &common] { run_pathdensity(*flags, common); });
}

}  // namespace paigraph
