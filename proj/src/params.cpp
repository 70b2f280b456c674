#include "recbench/params.hpp"

#include <charconv>
#include <cstdio>

namespace recbench {

std::string toString(const ParamValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<std::int64_t>(v))
    return std::to_string(std::get<std::int64_t>(v));
  if (std::holds_alternative<double>(v)) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(v));
    return buf;
  }
  return std::get<std::string>(v);
}

std::string canonical(const ParamMap& params) {
  std::string out;
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += ',';
    out += k + '=' + toString(v);
  }
  return out;
}

std::uint64_t paramHash(const ParamMap& params) {
  return fnv1a(canonical(params));
}

namespace {
const ParamValue& lookup(const ParamMap& p, const std::string& key) {
  auto it = p.find(key);
  require(it != p.end(), "missing parameter: " + key);
  return it->second;
}
}  // namespace

double getReal(const ParamMap& p, const std::string& key) {
  const ParamValue& v = lookup(p, key);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  fail("parameter " + key + " is not numeric");
}

std::int64_t getInt(const ParamMap& p, const std::string& key) {
  const ParamValue& v = lookup(p, key);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) {
    double d = std::get<double>(v);
    auto i = static_cast<std::int64_t>(d);
    require(static_cast<double>(i) == d, "parameter " + key + " is not integral");
    return i;
  }
  fail("parameter " + key + " is not an integer");
}

bool getBool(const ParamMap& p, const std::string& key) {
  const ParamValue& v = lookup(p, key);
  require(std::holds_alternative<bool>(v), "parameter " + key + " is not a bool");
  return std::get<bool>(v);
}

std::string getString(const ParamMap& p, const std::string& key) {
  const ParamValue& v = lookup(p, key);
  require(std::holds_alternative<std::string>(v),
          "parameter " + key + " is not a string");
  return std::get<std::string>(v);
}

ParamMap mergeParams(const ParamMap& defaults, const ParamMap& overrides,
                     const std::string& model_name) {
  ParamMap merged = defaults;
  for (const auto& [k, v] : overrides) {
    auto it = merged.find(k);
    require(it != merged.end(),
            "unknown parameter '" + k + "' for model " + model_name);
    it->second = v;
  }
  return merged;
}

ParamValue parseParamValue(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (ec == std::errc() && p == text.data() + text.size()) return i;
  }
  {
    double d = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec == std::errc() && p == text.data() + text.size()) return d;
  }
  return text;
}

}  // namespace recbench
