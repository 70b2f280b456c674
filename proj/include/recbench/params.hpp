#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

#include "recbench/common.hpp"

namespace recbench {

using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
/// Ordered map so the canonical serialization (and hence cache keys) is
/// stable.
using ParamMap = std::map<std::string, ParamValue>;

std::string toString(const ParamValue& v);
/// "k=200,normalize=false,shrinkage=12.5" — canonical, sorted by key.
std::string canonical(const ParamMap& params);
std::uint64_t paramHash(const ParamMap& params);

/// Typed getters; the key must exist (callers merge defaults first).
double getReal(const ParamMap& p, const std::string& key);
std::int64_t getInt(const ParamMap& p, const std::string& key);
bool getBool(const ParamMap& p, const std::string& key);
std::string getString(const ParamMap& p, const std::string& key);

/// defaults overlaid with overrides; unknown override keys are an error
/// (silent typos poison benchmark runs).
ParamMap mergeParams(const ParamMap& defaults, const ParamMap& overrides,
                     const std::string& model_name);

/// Parses "3", "0.5", "true", "text" into the narrowest matching type.
ParamValue parseParamValue(const std::string& text);

}  // namespace recbench
