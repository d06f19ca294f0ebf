#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "specktrack/error.hpp"

namespace specktrack {

/// Wraps a JSON object and tracks key consumption so unknown keys (typos)
/// can be rejected with finish(). Owns a copy of the document so callers may
/// pass temporaries.
class JsonReader {
 public:
  JsonReader(nlohmann::json j, std::string context)
      : j_(std::move(j)), context_(std::move(context)) {
    if (!j_.is_object()) {
      raise(ErrorCode::InvalidConfig, context_ + ": expected a JSON object");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return read<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      raise(ErrorCode::InvalidConfig, context_ + ": missing required key '" + key + "'");
    }
    return read<T>(key);
  }

  const nlohmann::json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        raise(ErrorCode::InvalidConfig, context_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  template <typename T>
  T read(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      raise(ErrorCode::InvalidConfig, context_ + ": key '" + key + "' has the wrong type");
    }
  }

  nlohmann::json j_;
  std::string context_;
  std::set<std::string> seen_;
};

inline nlohmann::json parse_json(const std::string& text, const std::string& context) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::InvalidConfig, context + ": invalid JSON: " + e.what());
  }
}

}  // namespace specktrack
