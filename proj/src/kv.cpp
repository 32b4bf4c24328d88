#include "vwgan/kv.hpp"

#include <cstdio>
#include <sstream>

namespace vwgan {

KvMap parse_kv(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;
    size_t eq = line.find('=', start);
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(lineno) + " has no '=': " + line);
    }
    std::string key = line.substr(start, eq - start);
    size_t key_end = key.find_last_not_of(" \t");
    key = key.substr(0, key_end + 1);
    std::string value = line.substr(eq + 1);
    size_t vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    size_t ve = value.find_last_not_of(" \t");
    if (ve != std::string::npos) value = value.substr(0, ve + 1);
    if (key.empty()) throw FormatError("config line " + std::to_string(lineno) + " has empty key");
    kv[key] = value;
  }
  return kv;
}

std::string serialize_kv(const std::vector<std::pair<std::string, std::string>>& items) {
  std::string out;
  for (const auto& [k, v] : items) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

const std::string& kv_get(const KvMap& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("config is missing key '" + key + "'");
  return it->second;
}

int64_t kv_get_int(const KvMap& kv, const std::string& key) {
  const std::string& s = kv_get(kv, key);
  size_t pos = 0;
  int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw FormatError("config key '" + key + "' is not an integer: " + s);
  }
  if (pos != s.size()) throw FormatError("config key '" + key + "' is not an integer: " + s);
  return v;
}

double kv_get_double(const KvMap& kv, const std::string& key) {
  const std::string& s = kv_get(kv, key);
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw FormatError("config key '" + key + "' is not a number: " + s);
  }
  if (pos != s.size()) throw FormatError("config key '" + key + "' is not a number: " + s);
  return v;
}

int64_t kv_get_int(const KvMap& kv, const std::string& key, int64_t fallback) {
  return kv.count(key) ? kv_get_int(kv, key) : fallback;
}

double kv_get_double(const KvMap& kv, const std::string& key, double fallback) {
  return kv.count(key) ? kv_get_double(kv, key) : fallback;
}

std::string kv_get(const KvMap& kv, const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace vwgan
