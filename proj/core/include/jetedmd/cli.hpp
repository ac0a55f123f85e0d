// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jetedmd {

inline constexpr const char* kVersion = "0.1.0";

enum class Subcommand {
  Sample,
  Flow,
  Velocities,
  Estimate,
  Spectrum,
  Eigenfunctions,
  Reconstruct,
  Predict,
  CompareSpectra,
  RickerStudy,
};

Subcommand parse_subcommand(const std::string& name);

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;  // --out
  std::optional<std::uint64_t> seed;             // --seed
  int threads = 0;                               // --threads (0 = leave as is)
};

/// Everything a run produced: artifact name -> path, plus the summary JSON
/// (also written to disk as summary.json).
struct ResultBundle {
  std::filesystem::path out_dir;
  std::map<std::string, std::filesystem::path> artifacts;
  std::string summary_json;
};

/// Executes the pipeline declared by the config for one subcommand:
/// sample -> data -> estimate -> spectrum / eigenfunctions / reconstruct /
/// predict as requested. Deterministic: identical configs produce identical
/// numeric payloads.
ResultBundle run(Subcommand cmd, const RunOptions& opts);

struct SpectraComparison {
  double hausdorff_distance = 0.0;
  /// Greedy nearest matching (a_index, b_index, distance), both files' extra
  /// entries excluded.
  std::vector<std::array<double, 3>> matches;
  std::string report_json;
};

SpectraComparison compare_spectra(const std::filesystem::path& file_a,
                                  const std::filesystem::path& file_b,
                                  const std::optional<std::filesystem::path>& out_dir);

}  // namespace jetedmd
