#include <CLI11.hpp>

#include <iostream>

#include "epilab/epilab.hpp"

using namespace epilab;
namespace ex = epilab::experiment;
namespace fs = std::filesystem;

namespace {

void print_list(const char* title, const std::vector<std::string>& items) {
  std::cout << title << ":\n";
  for (const auto& i : items) std::cout << "  " << i << "\n";
}

int list_catalog() {
  print_list("experiments", ex::experiment_tags());
  print_list("domains", {"strip", "epigraph", "omega1", "omega3", "orthant", "ball", "revolution"});
  print_list("epigraphs", geometry::epigraph_catalog());
  print_list("nonlinearities", ex::nonlinearity_tags());
  print_list("profiles", ex::profile_tags());
  print_list("brandt cases", ex::brandt_case_tags());
  print_list("boundary probes", ex::boundary_probe_tags());
  return ex::kExitOk;
}

int run(const std::string& config, const std::optional<std::string>& out_dir) {
  ex::ExperimentConfig cfg;
  try {
    const fs::path path(config);
    cfg = ex::parse_config(ex::load_config(path), path.parent_path().empty() ? "." : path.parent_path());
  } catch (const LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::exit_code_for(e.kind());
  }
  const auto dir = ex::run_dir(cfg, out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt);
  try {
    const auto res = ex::run(cfg, dir);
    if (res.record.contains("error"))
      std::cerr << "error: " << res.record["error"].value("message", "") << "\n";
    ex::report(dir, std::cout, std::cerr);
    return res.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ex::kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on semilinear Dirichlet problems in unbounded domains"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_dir;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run_cmd->add_option("config", config, "Config file")->required();
  run_cmd->add_option("-o,--output-dir", out_dir, "Override the config's output_dir");

  std::string dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize a finished run directory");
  report_cmd->add_option("dir", dir, "Run directory")->required();

  auto* list_cmd = app.add_subcommand("list-catalog", "List the built-in domains, nonlinearities and experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitValidation;
  }
  if (*run_cmd) return run(config, out_dir);
  if (*report_cmd) return ex::report(dir, std::cout, std::cerr);
  if (*list_cmd) return list_catalog();
  return ex::kExitValidation;
}
