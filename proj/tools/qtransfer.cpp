// qtransfer: run a harvest / teleport / nogo / compare scenario from a config file.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "qtransfer/app/run.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"Entanglement harvesting, teleportation and direct-transmission scenarios"};
  qtransfer::app::RunOptions opt;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  cli.add_option("--config", opt.config_path, "INI or JSON run configuration")->required();
  cli.add_option("--out", out, "output directory (overrides QTRANSFER_OUT and [output] dir)");
  cli.add_option("--seed", seed, "random seed for generated models");
  cli.add_option("--threads", threads, "worker threads (overrides QTRANSFER_THREADS)")->check(CLI::PositiveNumber);
  cli.add_flag("--verbose", opt.verbose, "progress on stderr");
  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : qtransfer::app::kExitConfig;
  }
  opt.out_dir = out;
  opt.seed = seed;
  opt.threads = threads;
  return qtransfer::app::run(opt);
}
