#include <iostream>

#include "pai/errors.hpp"
#include "run.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Pruning-at-initialisation graphon laboratory", "paigraph"};
  app.require_subcommand(1);
  paigraph::Common common;
  paigraph::add_converge(app, common);
  paigraph::add_graphon(app, common);
  paigraph::add_pathdensity(app, common);
  paigraph::add_ntk(app, common);
  paigraph::add_densecore(app, common);
  paigraph::add_uat(app, common);
  paigraph::add_cutnorm(app, common);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = paigraph::expand_config(app, args);
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? paigraph::kOk : paigraph::kUsage;
  }
  return paigraph::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const pai::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return paigraph::kIo;
  } catch (const pai::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return paigraph::kIo;
  } catch (const pai::ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return paigraph::kUsage;
  } catch (const pai::FeatureError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return paigraph::kUsage;
  } catch (const pai::BudgetError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return paigraph::kUsage;
  } catch (const pai::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return paigraph::kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return paigraph::kNumeric;
  }
}
