// wavesrc: simulate measurements, invert for stationary or moving sources,
// and export plot data.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <cstdlib>
#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "wavesrc/commands.hpp"
#include "wavesrc/error.hpp"
#include "wavesrc/simd.hpp"

namespace {

void report(const wavesrc::RunManifest& m, const std::filesystem::path& out) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << m.command << ": wrote " << m.outputs.size() << " files to " << out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain acoustic source reconstruction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", WAVESRC_VERSION);

  std::string config_path;
  std::string data_path;
  std::string out_path = "out";
  std::string isa;
  std::optional<std::uint64_t> seed;
  int threads = 1;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_path, "output directory")->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--isa", isa, "kernel variant: scalar, avx2, neon (default: best available)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "synthesize (noisy) sensor measurements");
  common(simulate);
  simulate->add_option("--seed", seed, "noise seed (overrides noise.seed)");

  CLI::App* inv_static = app.add_subcommand("invert-static", "reconstruct stationary point sources");
  common(inv_static);
  inv_static->add_option("--data", data_path, "measurements.json")->required()->check(CLI::ExistingFile);

  CLI::App* inv_moving = app.add_subcommand("invert-moving", "reconstruct a moving source trajectory");
  common(inv_moving);
  inv_moving->add_option("--data", data_path, "measurements.json")->required()->check(CLI::ExistingFile);

  CLI::App* plot = app.add_subcommand("plot-data", "export long-format CSVs for plotting");
  common(plot);
  plot->add_option("--data", data_path, "output directory of an inversion")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty()) wavesrc::simd::set_isa(wavesrc::simd::isa_from_string(isa));
    const wavesrc::ExperimentConfig cfg = wavesrc::load_config(config_path);
    const wavesrc::RunOptions opts{threads, seed};
    const std::filesystem::path out = out_path;

    wavesrc::RunManifest m;
    if (simulate->parsed())
      m = wavesrc::cmd_simulate(cfg, out, opts);
    else if (inv_static->parsed())
      m = wavesrc::cmd_invert_static(cfg, data_path, out, opts);
    else if (inv_moving->parsed())
      m = wavesrc::cmd_invert_moving(cfg, data_path, out, opts);
    else
      m = wavesrc::cmd_plotdata(cfg, data_path, out);
    report(m, out);
    return EXIT_SUCCESS;
  } catch (const wavesrc::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const wavesrc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
