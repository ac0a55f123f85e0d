// SPDX-License-Identifier: Apache-2.0
#include "jetedmd/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jetedmd/errors.hpp"

namespace jetedmd {

const std::string& TomlValue::as_string() const {
  if (!is_string()) throw ConfigError("TOML value is not a string");
  return std::get<std::string>(v_);
}

std::int64_t TomlValue::as_int() const {
  if (!is_int()) throw ConfigError("TOML value is not an integer");
  return std::get<std::int64_t>(v_);
}

double TomlValue::as_number() const {
  if (is_int()) return static_cast<double>(std::get<std::int64_t>(v_));
  if (is_float()) return std::get<double>(v_);
  throw ConfigError("TOML value is not a number");
}

bool TomlValue::as_bool() const {
  if (!is_bool()) throw ConfigError("TOML value is not a boolean");
  return std::get<bool>(v_);
}

const TomlArray& TomlValue::as_array() const {
  if (!is_array()) throw ConfigError("TOML value is not an array");
  return std::get<TomlArray>(v_);
}

namespace {

struct TomlCursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  const std::string& origin;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
  }
  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
  }
  void skip_ws_and_comments() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else {
        break;
      }
    }
  }
};

TomlValue parse_value(TomlCursor& cur);

TomlValue parse_array(TomlCursor& cur) {
  cur.take();  // '['
  TomlArray items;
  while (true) {
    cur.skip_ws_and_comments();
    if (cur.eof()) cur.fail("unterminated array");
    if (cur.peek() == ']') {
      cur.take();
      break;
    }
    items.push_back(parse_value(cur));
    cur.skip_ws_and_comments();
    if (cur.eof()) cur.fail("unterminated array");
    if (cur.peek() == ',') {
      cur.take();
    } else if (cur.peek() != ']') {
      cur.fail("expected ',' or ']' in array");
    }
  }
  return TomlValue(TomlValue::Storage(std::move(items)));
}

TomlValue parse_scalar(TomlCursor& cur) {
  std::string token;
  while (!cur.eof()) {
    const char c = cur.peek();
    if (c == ',' || c == ']' || c == '#' || c == '\n' || c == '\r' || c == ' ' ||
        c == '\t') {
      break;
    }
    token.push_back(cur.take());
  }
  if (token.empty()) cur.fail("expected a value");
  if (token == "true") return TomlValue(TomlValue::Storage(true));
  if (token == "false") return TomlValue(TomlValue::Storage(false));
  const bool looks_float = token.find_first_of(".eEnN") != std::string::npos ||
                           token == "inf" || token == "-inf" || token == "+inf";
  if (!looks_float) {
    std::int64_t iv = 0;
    const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
    if (ec == std::errc() && p == token.data() + token.size()) {
      return TomlValue(TomlValue::Storage(iv));
    }
  }
  try {
    std::size_t used = 0;
    const double dv = std::stod(token, &used);
    if (used == token.size()) return TomlValue(TomlValue::Storage(dv));
  } catch (...) {
  }
  cur.fail("cannot parse value '" + token + "'");
}

TomlValue parse_value(TomlCursor& cur) {
  const char c = cur.peek();
  if (c == '[') return parse_array(cur);
  if (c == '"') {
    cur.take();
    std::string s;
    while (!cur.eof() && cur.peek() != '"') {
      char ch = cur.take();
      if (ch == '\\' && !cur.eof()) {
        const char esc = cur.take();
        switch (esc) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: cur.fail("unsupported escape sequence");
        }
      }
      s.push_back(ch);
    }
    if (cur.eof()) cur.fail("unterminated string");
    cur.take();
    return TomlValue(TomlValue::Storage(std::move(s)));
  }
  return parse_scalar(cur);
}

std::string parse_key(TomlCursor& cur) {
  std::string key;
  while (!cur.eof()) {
    const char c = cur.peek();
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
        c == '.') {
      key.push_back(cur.take());
    } else {
      break;
    }
  }
  if (key.empty()) cur.fail("expected a key");
  return key;
}

}  // namespace

TomlTable TomlTable::parse_string(const std::string& text, const std::string& origin) {
  TomlTable table;
  table.raw_ = text;
  TomlCursor cur{text, 0, 1, origin};
  std::string section;
  while (true) {
    cur.skip_ws_and_comments();
    if (cur.eof()) break;
    if (cur.peek() == '[') {
      cur.take();
      section = parse_key(cur);
      cur.skip_ws_inline();
      if (cur.eof() || cur.peek() != ']') cur.fail("expected ']' after table name");
      cur.take();
      continue;
    }
    const std::string key = parse_key(cur);
    cur.skip_ws_inline();
    if (cur.eof() || cur.peek() != '=') cur.fail("expected '=' after key '" + key + "'");
    cur.take();
    cur.skip_ws_inline();
    if (cur.eof()) cur.fail("expected a value for key '" + key + "'");
    TomlValue value = parse_value(cur);
    const std::string full = section.empty() ? key : section + "." + key;
    if (table.entries_.count(full)) cur.fail("duplicate key '" + full + "'");
    table.entries_.emplace(full, std::move(value));
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::filesystem::path& path) {
  return parse_string(read_text(path), path.string());
}

bool TomlTable::contains(const std::string& key) const {
  return entries_.count(key) > 0;
}

const TomlValue& TomlTable::at(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string TomlTable::get_string(const std::string& key,
                                  const std::string& fallback) const {
  return contains(key) ? at(key).as_string() : fallback;
}

std::string TomlTable::require_string(const std::string& key) const {
  return at(key).as_string();
}

std::int64_t TomlTable::get_int(const std::string& key, std::int64_t fallback) const {
  return contains(key) ? at(key).as_int() : fallback;
}

double TomlTable::get_number(const std::string& key, double fallback) const {
  return contains(key) ? at(key).as_number() : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  return contains(key) ? at(key).as_bool() : fallback;
}

std::optional<Eigen::VectorXd> TomlTable::get_vector(const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  const TomlArray& arr = at(key).as_array();
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = arr[i].as_number();
  }
  return v;
}

std::optional<std::vector<std::array<double, 2>>> TomlTable::get_box(
    const std::string& key) const {
  if (!contains(key)) return std::nullopt;
  const TomlArray& arr = at(key).as_array();
  std::vector<std::array<double, 2>> box;
  for (const TomlValue& axis : arr) {
    const TomlArray& pair = axis.as_array();
    if (pair.size() != 2) throw ConfigError("box axis must be [low, high]");
    box.push_back({pair[0].as_number(), pair[1].as_number()});
  }
  return box;
}

std::vector<std::string> TomlTable::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> keys;
  for (const auto& [k, v] : entries_) {
    if (k.rfind(prefix, 0) == 0) keys.push_back(k);
  }
  return keys;
}

// ---------------------------------------------------------------------------

std::uint64_t config_hash(const std::string& raw_text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : raw_text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string Provenance::comment_line() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "# jetedmd %s config=%016llx seed=%llu",
                version.c_str(), static_cast<unsigned long long>(config_hash),
                static_cast<unsigned long long>(seed));
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct CsvFile {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  CsvFile csv;
  std::size_t line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (csv.header.empty()) {
      csv.header = std::move(fields);
    } else {
      if (fields.size() != csv.header.size()) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": expected " + std::to_string(csv.header.size()) +
                      " fields, got " + std::to_string(fields.size()));
      }
      csv.rows.push_back(std::move(fields));
    }
  }
  if (csv.header.empty()) throw IoError(path.string() + ": missing CSV header");
  return csv;
}

double parse_field(const std::filesystem::path& path, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (...) {
    throw IoError(path.string() + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

void write_spectrum_csv(const std::filesystem::path& path,
                        const std::vector<SpectrumRow>& rows,
                        const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << "\n" << "re,im,source\n";
  for (const auto& r : rows) {
    out << format_double(r.re) << ',' << format_double(r.im) << ',' << r.source
        << "\n";
  }
  write_text_atomic(path, out.str());
}

std::vector<SpectrumRow> read_spectrum_csv(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path);
  if (csv.header != std::vector<std::string>{"re", "im", "source"}) {
    throw IoError(path.string() + ": expected header re,im,source");
  }
  std::vector<SpectrumRow> rows;
  for (const auto& r : csv.rows) {
    rows.push_back({parse_field(path, r[0]), parse_field(path, r[1]), r[2]});
  }
  return rows;
}

void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& nodes,
                    const Eigen::VectorXcd& values, const Provenance& prov) {
  if (nodes.cols() != values.size()) throw ConfigError("write_grid_csv: size mismatch");
  std::ostringstream out;
  out << prov.comment_line() << "\n";
  for (Eigen::Index c = 0; c < nodes.rows(); ++c) out << 'x' << (c + 1) << ',';
  out << "re,im,abs,arg\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index c = 0; c < nodes.rows(); ++c) {
      out << format_double(nodes(c, i)) << ',';
    }
    const Complex v = values(i);
    out << format_double(v.real()) << ',' << format_double(v.imag()) << ','
        << format_double(std::abs(v)) << ',' << format_double(std::arg(v)) << "\n";
  }
  write_text_atomic(path, out.str());
}

void read_grid_csv(const std::filesystem::path& path, Eigen::MatrixXd& nodes,
                   Eigen::VectorXcd& values) {
  const CsvFile csv = read_csv(path);
  if (csv.header.size() < 5) {
    throw IoError(path.string() + ": expected x1..xd,re,im,abs,arg header");
  }
  const auto d = csv.header.size() - 4;
  for (std::size_t c = 0; c < d; ++c) {
    if (csv.header[c] != "x" + std::to_string(c + 1)) {
      throw IoError(path.string() + ": expected x1..xd,re,im,abs,arg header");
    }
  }
  nodes.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(csv.rows.size()));
  values.resize(static_cast<Eigen::Index>(csv.rows.size()));
  for (std::size_t j = 0; j < csv.rows.size(); ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      nodes(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          parse_field(path, csv.rows[j][c]);
    }
    values(static_cast<Eigen::Index>(j)) = Complex(parse_field(path, csv.rows[j][d]),
                                                   parse_field(path, csv.rows[j][d + 1]));
  }
}

void write_snapshot_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x,
                        const Eigen::MatrixXd& y, const Provenance& prov) {
  if (x.cols() != y.cols() || x.rows() != y.rows()) {
    throw ConfigError("write_snapshot_csv: shape mismatch");
  }
  std::ostringstream out;
  out << prov.comment_line() << "\n";
  for (Eigen::Index c = 0; c < x.rows(); ++c) out << 'x' << (c + 1) << ',';
  for (Eigen::Index c = 0; c < y.rows(); ++c) {
    out << 'y' << (c + 1) << (c + 1 < y.rows() ? "," : "");
  }
  out << "\n";
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index c = 0; c < x.rows(); ++c) out << format_double(x(c, j)) << ',';
    for (Eigen::Index c = 0; c < y.rows(); ++c) {
      out << format_double(y(c, j)) << (c + 1 < y.rows() ? "," : "");
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

void read_snapshot_csv(const std::filesystem::path& path, Eigen::MatrixXd& x,
                       Eigen::MatrixXd& y) {
  const CsvFile csv = read_csv(path);
  const auto cols = csv.header.size();
  if (cols % 2 != 0) throw IoError(path.string() + ": expected x1..xd,y1..yd header");
  const auto d = cols / 2;
  for (std::size_t c = 0; c < d; ++c) {
    if (csv.header[c] != "x" + std::to_string(c + 1) ||
        csv.header[d + c] != "y" + std::to_string(c + 1)) {
      throw IoError(path.string() + ": expected x1..xd,y1..yd header");
    }
  }
  x.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(csv.rows.size()));
  y.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(csv.rows.size()));
  for (std::size_t j = 0; j < csv.rows.size(); ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          parse_field(path, csv.rows[j][c]);
      y(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          parse_field(path, csv.rows[j][d + c]);
    }
  }
}

void write_points_csv(const std::filesystem::path& path, const Eigen::MatrixXd& x,
                      const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << "\n";
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    out << 'x' << (c + 1) << (c + 1 < x.rows() ? "," : "");
  }
  out << "\n";
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index c = 0; c < x.rows(); ++c) {
      out << format_double(x(c, j)) << (c + 1 < x.rows() ? "," : "");
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

Eigen::MatrixXd read_points_csv(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path);
  const auto d = csv.header.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d),
                    static_cast<Eigen::Index>(csv.rows.size()));
  for (std::size_t j = 0; j < csv.rows.size(); ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          parse_field(path, csv.rows[j][c]);
    }
  }
  return x;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXcd& m,
                      const Provenance& prov) {
  std::ostringstream out;
  out << prov.comment_line() << "\n";
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    out << 'c' << (c + 1) << "_re,c" << (c + 1) << "_im"
        << (c + 1 < m.cols() ? "," : "");
  }
  out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag())
          << (c + 1 < m.cols() ? "," : "");
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

Eigen::MatrixXcd read_matrix_csv(const std::filesystem::path& path) {
  const CsvFile csv = read_csv(path);
  if (csv.header.size() % 2 != 0) {
    throw IoError(path.string() + ": expected paired re/im columns");
  }
  const auto cols = csv.header.size() / 2;
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(csv.rows.size()),
                     static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          Complex(parse_field(path, csv.rows[r][2 * c]),
                  parse_field(path, csv.rows[r][2 * c + 1]));
    }
  }
  return m;
}

void read_trajectory_csv(const std::filesystem::path& path, Eigen::VectorXd& times,
                         Eigen::MatrixXd& states) {
  const CsvFile csv = read_csv(path);
  if (csv.header.empty() || csv.header[0] != "t") {
    throw IoError(path.string() + ": expected t,x1..xd header");
  }
  const auto d = csv.header.size() - 1;
  times.resize(static_cast<Eigen::Index>(csv.rows.size()));
  states.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(csv.rows.size()));
  for (std::size_t j = 0; j < csv.rows.size(); ++j) {
    times(static_cast<Eigen::Index>(j)) = parse_field(path, csv.rows[j][0]);
    for (std::size_t c = 0; c < d; ++c) {
      states(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) =
          parse_field(path, csv.rows[j][c + 1]);
    }
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Eigen::VectorXd& times, const Eigen::MatrixXd& states,
                          const Provenance& prov) {
  if (times.size() != states.cols()) {
    throw ConfigError("write_trajectory_csv: size mismatch");
  }
  std::ostringstream out;
  out << prov.comment_line() << "\n" << 't';
  for (Eigen::Index c = 0; c < states.rows(); ++c) out << ",x" << (c + 1);
  out << "\n";
  for (Eigen::Index j = 0; j < times.size(); ++j) {
    out << format_double(times(j));
    for (Eigen::Index c = 0; c < states.rows(); ++c) {
      out << ',' << format_double(states(c, j));
    }
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

}  // namespace jetedmd
