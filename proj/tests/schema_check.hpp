#pragma once

// Enough of JSON Schema to check the published schemas: type, required,
// properties, additionalProperties false, items, min/maxItems, enum, anyOf
// and local $ref.

#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "dilaflow/io.hpp"

namespace schema {

using dilaflow::Json;

inline Json load(const std::string& name) {
  std::ifstream in(std::string(DILAFLOW_SCHEMA_DIR) + "/" + name + ".schema.json");
  return Json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
}

inline bool has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

inline void check(const Json& v, const Json& s, const Json& root, const std::string& at, std::vector<std::string>& errors) {
  if (s.contains("$ref")) {
    const std::string ref = s["$ref"];
    const std::string name = ref.substr(ref.rfind('/') + 1);
    check(v, root["definitions"][name], root, at, errors);
    return;
  }
  if (s.contains("anyOf")) {
    for (const Json& alt : s["anyOf"]) {
      std::vector<std::string> local;
      check(v, alt, root, at, local);
      if (local.empty()) return;
    }
    errors.push_back(at + ": matches no alternative");
    return;
  }
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const Json& t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, s["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(at + ": wrong type");
      return;
    }
  }
  if (s.contains("enum")) {
    bool ok = false;
    for (const Json& e : s["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(at + ": not in enum");
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const Json& r : s["required"])
        if (!v.contains(r.get<std::string>())) errors.push_back(at + ": missing " + r.get<std::string>());
    const bool closed = s.contains("additionalProperties") && s["additionalProperties"] == false;
    for (const auto& [key, val] : v.items()) {
      if (s.contains("properties") && s["properties"].contains(key))
        check(val, s["properties"][key], root, at + "." + key, errors);
      else if (closed)
        errors.push_back(at + ": unexpected " + key);
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) errors.push_back(at + ": too short");
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) errors.push_back(at + ": too long");
    if (s.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], s["items"], root, at + "[" + std::to_string(i) + "]", errors);
  }
}

inline std::vector<std::string> errors(const Json& v, const std::string& name) {
  const Json s = load(name);
  std::vector<std::string> out;
  check(v, s, s, "$", out);
  return out;
}

}  // namespace schema
