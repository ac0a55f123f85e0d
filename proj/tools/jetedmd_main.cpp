// SPDX-License-Identifier: Apache-2.0
//
// jetedmd <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--threads <k>]
//
// Subcommands: sample, flow, velocities, estimate, spectrum, eigenfunctions,
// reconstruct, predict, compare-spectra, ricker-study.
// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 IO error.

#include <CLI11.hpp>
#include <iostream>

#include "jetedmd/cli.hpp"
#include "jetedmd/errors.hpp"

namespace {

int dispatch(const std::string& name, const jetedmd::RunOptions& opts,
             const std::vector<std::string>& files,
             const std::optional<std::filesystem::path>& out_dir) {
  const jetedmd::Subcommand cmd = jetedmd::parse_subcommand(name);
  if (cmd == jetedmd::Subcommand::CompareSpectra) {
    if (files.size() != 2) {
      throw jetedmd::ConfigError("compare-spectra needs exactly two spectrum files");
    }
    jetedmd::compare_spectra(files[0], files[1], out_dir);
    return 0;
  }
  if (opts.config_path.empty()) {
    throw jetedmd::ConfigError("--config is required for '" + name + "'");
  }
  const jetedmd::ResultBundle bundle = jetedmd::run(cmd, opts);
  for (const auto& [key, path] : bundle.artifacts) {
    std::cout << key << ": " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JetEDMD: Koopman/Perron-Frobenius operator estimation on RKHS"};
  app.require_subcommand(0);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::vector<std::string> files;

  app.add_option("subcommand", files)->expected(-1);
  app.add_option("--config,-c", config, "experiment config (TOML)");
  app.add_option("--out,-o", out, "output directory override");
  app.add_option("--seed,-s", seed, "sampling seed override")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_option("--threads,-t", threads, "linear algebra thread count");

  CLI11_PARSE(app, argc, argv);

  if (files.empty()) {
    std::cerr << "usage: jetedmd <subcommand> --config <path> [--out <dir>]"
                 " [--seed <u64>] [--threads <k>]\n"
                 "subcommands: sample flow velocities estimate spectrum"
                 " eigenfunctions reconstruct predict compare-spectra"
                 " ricker-study\n";
    return 2;
  }
  const std::string name = files.front();
  files.erase(files.begin());

  jetedmd::RunOptions opts;
  opts.config_path = config;
  if (!out.empty()) opts.out_dir = out;
  if (seed_set) opts.seed = seed;
  opts.threads = threads;

  try {
    return dispatch(name, opts,
                    files, !out.empty()
                               ? std::optional<std::filesystem::path>(out)
                               : std::nullopt);
  } catch (const jetedmd::ConfigError& e) {
    std::cerr << "{\"error\":\"config\",\"message\":\"" << e.what() << "\"}\n";
    return 2;
  } catch (const jetedmd::NumericalError& e) {
    std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  } catch (const jetedmd::IoError& e) {
    std::cerr << "{\"error\":\"io\",\"message\":\"" << e.what() << "\"}\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":\"internal\",\"message\":\"" << e.what() << "\"}\n";
    return 3;
  }
}
