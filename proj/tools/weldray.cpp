#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "weldray/errors.hpp"
#include "weldray/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDomain = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ray-based ultrasonic inspection of dissimilar metal welds"};
  std::string study;
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  app.add_option("study", study, "trace | orientation-map | bscan | tilt-sweep | validate")
      ->required()
      ->check(CLI::IsMember(weldray::kStudies));
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Output directory, overrides the config");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const std::filesystem::path path(config_path);
    weldray::RunConfig config = weldray::load_config(path);
    config.study = study;
    weldray::RunOptions options;
    options.base_dir = path.parent_path();
    if (!out_dir.empty()) options.output_dir = out_dir;
    options.threads = threads;
    const auto result = weldray::run(config, options);
    std::cout << result.manifest.string() << '\n';
    if (!result.passed) {
      std::cerr << "weldray: invariant checks failed, see validate_report.json\n";
      return kExitDomain;
    }
    return 0;
  } catch (const weldray::ConfigError& e) {
    std::cerr << "weldray: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const weldray::DomainError& e) {
    std::cerr << "weldray: " << e.what() << '\n';
    return kExitDomain;
  } catch (const weldray::ContractViolation& e) {
    std::cerr << "weldray: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "weldray: " << e.what() << '\n';
    return 1;
  }
}
