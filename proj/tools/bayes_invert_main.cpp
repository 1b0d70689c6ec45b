// Command-line front end. Exit codes: 0 ok, 2 configuration error, 3 runtime error.

#include <bayes_invert/bayes_invert.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

int cmd_run(const std::string& path, binv::Index jobs, std::uint64_t offset, const std::string& out_dir) {
  binv::RunConfig cfg;
  try {
    cfg = binv::load_config(path);
  } catch (const binv::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto results = binv::run_experiment(cfg, jobs, offset);
    const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("results") / cfg.name : std::filesystem::path(out_dir);
    binv::write_results(dir, cfg, results);
    const auto s = binv::summarize(results);
    std::cout << cfg.name << ": " << s.runs << " runs, MAE theta " << s.mae_theta << ", sigma " << s.mae_sigma
              << ", complete " << s.mae_complete << "; results in " << dir.string() << '\n';
  } catch (const binv::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  try {
    const binv::RunConfig cfg = binv::load_config(path);
    std::cout << binv::to_json(cfg).dump(2) << '\n';
  } catch (const binv::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}

int cmd_list() {
  for (const auto& e : binv::list_experiments())
    std::cout << e.id << "  M=" << e.M << " K=" << e.K << " R=" << e.R << "  " << e.description << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inversion with unknown noise covariance"};
  app.require_subcommand(1);

  std::string config;
  binv::Index jobs = 1;
  std::uint64_t offset = 0;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  run->add_option("--config", config, "config file")->required();
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed-offset", offset, "added to the run index when seeding");
  run->add_option("--out", out_dir, "output directory (default results/<name>)");

  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  validate->add_option("--config", config, "config file")->required();

  auto* list = app.add_subcommand("list-experiments", "list the built-in experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }
  if (*run) return cmd_run(config, jobs, offset, out_dir);
  if (*validate) return cmd_validate(config);
  if (*list) return cmd_list();
  return kConfigError;
}
