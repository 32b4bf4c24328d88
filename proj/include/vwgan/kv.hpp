#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vwgan/errors.hpp"

namespace vwgan {

using KvMap = std::map<std::string, std::string>;

// Parses "key=value" lines; blank lines and '#' comments are skipped.
KvMap parse_kv(const std::string& text);

// Emits one "key=value" line per item in the given order.
std::string serialize_kv(const std::vector<std::pair<std::string, std::string>>& items);

const std::string& kv_get(const KvMap& kv, const std::string& key);
int64_t kv_get_int(const KvMap& kv, const std::string& key);
double kv_get_double(const KvMap& kv, const std::string& key);
int64_t kv_get_int(const KvMap& kv, const std::string& key, int64_t fallback);
double kv_get_double(const KvMap& kv, const std::string& key, double fallback);
std::string kv_get(const KvMap& kv, const std::string& key, const std::string& fallback);

std::string format_double(double v);  // round-trippable %.17g

}  // namespace vwgan
