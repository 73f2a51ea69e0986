#pragma once

#include <cmath>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "membrane/error.hpp"

namespace membrane::json_util {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidInput, "key '" + path + "': " + what);
}

inline void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

inline const json& member(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  const std::string p = path.empty() ? std::string(key) : path + "." + key;
  if (it == j.end()) fail(p, "missing");
  return *it;
}

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

inline std::string kind_of(const json& j, const std::string& path) {
  const json& k = member(j, path, "kind");
  if (!k.is_string()) fail(join(path, "kind"), "expected a string");
  return k.get<std::string>();
}

}  // namespace membrane::json_util
