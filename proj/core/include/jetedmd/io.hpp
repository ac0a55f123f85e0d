// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jetedmd/numerics.hpp"

namespace jetedmd {

// ---------------------------------------------------------------------------
// Minimal TOML subset used by experiment configs: [table] headers, bare keys,
// strings, integers, floats, booleans, and (nested) arrays. Comments with #.
// No inline tables, dates, or multiline strings.
// ---------------------------------------------------------------------------

class TomlValue;
using TomlArray = std::vector<TomlValue>;

class TomlValue {
 public:
  using Storage = std::variant<std::string, std::int64_t, double, bool, TomlArray>;

  TomlValue() : v_(std::int64_t{0}) {}
  explicit TomlValue(Storage v) : v_(std::move(v)) {}

  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<TomlArray>(v_); }

  const std::string& as_string() const;
  std::int64_t as_int() const;
  double as_number() const;  // int or float
  bool as_bool() const;
  const TomlArray& as_array() const;

 private:
  Storage v_;
};

/// Parsed config: dotted keys "table.key" -> value.
class TomlTable {
 public:
  static TomlTable parse_file(const std::filesystem::path& path);
  static TomlTable parse_string(const std::string& text, const std::string& origin = "<string>");

  bool contains(const std::string& dotted_key) const;
  const TomlValue& at(const std::string& dotted_key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_number(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<Eigen::VectorXd> get_vector(const std::string& key) const;
  std::optional<std::vector<std::array<double, 2>>> get_box(const std::string& key) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  const std::map<std::string, TomlValue>& entries() const { return entries_; }
  const std::string& raw_text() const { return raw_; }

 private:
  std::map<std::string, TomlValue> entries_;
  std::string raw_;
};

// ---------------------------------------------------------------------------
// CSV artifacts. All files open with a provenance comment line
// "# jetedmd <version> config=<hash> seed=<seed>", then the header. Numbers
// are written with 17 significant digits, LF line endings, UTF-8.
// ---------------------------------------------------------------------------

struct Provenance {
  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;

  std::string comment_line() const;
};

/// FNV-1a hash of the raw config text; recorded in every output.
std::uint64_t config_hash(const std::string& raw_text);

std::string format_double(double v);

struct SpectrumRow {
  double re = 0.0;
  double im = 0.0;
  std::string source;  // jetedmd | edmd | kdmd | theory
};

/// Spectrum CSV: header "re,im,source".
void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<SpectrumRow>& rows,
                        const Provenance& prov);
std::vector<SpectrumRow> read_spectrum_csv(const std::filesystem::path& path);

/// Grid CSV: header "x1,...,xd,re,im,abs,arg", row-major over the grid.
void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& nodes,
                    const Eigen::VectorXcd& values, const Provenance& prov);
void read_grid_csv(const std::filesystem::path& path, Eigen::MatrixXd& nodes,
                   Eigen::VectorXcd& values);

/// Snapshot CSV: header "x1..xd,y1..yd", one pair per row.
void write_snapshot_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& y, const Provenance& prov);
void read_snapshot_csv(const std::filesystem::path& path, Eigen::MatrixXd& x,
                       Eigen::MatrixXd& y);

/// Points-only CSV: header "x1..xd".
void write_points_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x,
                      const Provenance& prov);
Eigen::MatrixXd read_points_csv(const std::filesystem::path& path);

/// Complex matrix CSV with paired columns "c1_re,c1_im,...".
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& m,
                      const Provenance& prov);
Eigen::MatrixXcd read_matrix_csv(const std::filesystem::path& path);

/// Trajectory CSV: header "t,x1..xd".
void write_trajectory_csv(const std::filesystem::path& path,
                          const Eigen::VectorXd& times, const Eigen::MatrixXd& states,
                          const Provenance& prov);
void read_trajectory_csv(const std::filesystem::path& path, Eigen::VectorXd& times,
                         Eigen::MatrixXd& states);

/// Atomic text write: temp file in the same directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace jetedmd
