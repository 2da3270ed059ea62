#include "xbar/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "xbar/rng.hpp"

namespace xbar {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

} // namespace

CsvMatrix load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  CsvMatrix m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string token;
    std::vector<double> row;
    while (std::getline(ls, token, ',')) {
      token = trim(token);
      if (token.empty())
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty field");
      // Skip a header row of non-numeric labels.
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        if (m.rows == 0 && m.values.empty()) {
          row.clear();
          break;
        }
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number '" +
                         token + "'");
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (m.cols == 0) m.cols = static_cast<int>(row.size());
    else if (static_cast<int>(row.size()) != m.cols)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(m.cols) + " fields, got " + std::to_string(row.size()));
    m.values.insert(m.values.end(), row.begin(), row.end());
    m.rows += 1;
  }
  if (m.rows == 0) throw ParseError(path.string() + ": no numeric rows");
  return m;
}

std::vector<double> load_csv_vector(const std::filesystem::path& path) {
  const CsvMatrix m = load_csv_matrix(path);
  if (m.cols != 1 && m.rows != 1)
    throw ParseError(path.string() + ": expected a single row or column vector");
  return m.values;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv_matrix(const CsvMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path.string() + "'");
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) {
      if (j) out << ',';
      out << format_double(m.at(i, j));
    }
    out << '\n';
  }
}

void write_csv_vector(const std::vector<double>& v, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write '" + path.string() + "'");
  for (double x : v) out << format_double(x) << '\n';
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream content;
  content << in.rdbuf();
  const std::string text = content.str();

  KvConfig cfg;
  cfg.source_path_ = path.string();
  cfg.content_hash_ = fnv1a64(text);

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string KvConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("missing config key '" + key + "'" +
                      (source_path_.empty() ? "" : " in " + source_path_));
  return it->second;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" + v + "'");
  }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t KvConfig::get_int(const std::string& key) const {
  const std::string v = get(key);
  try {
    return std::stoll(v);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" + v + "'");
  }
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

void write_manifest(const std::filesystem::path& path, const KvConfig& config,
                    std::uint64_t seed, const std::string& command) {
  std::ofstream out(path);
  if (!out) throw SimError("cannot write manifest '" + path.string() + "'");
  out << "xbarsim-manifest 1\n";
  out << "version " << kVersion << "\n";
  out << "command " << command << "\n";
  out << "config " << (config.source_path().empty() ? "-" : config.source_path()) << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config.content_hash()));
  out << "config_hash " << buf << "\n";
  out << "seed " << seed << "\n";
}

} // namespace xbar
