#include "chartattrib/llm/schema.hpp"

namespace chartattrib::llm {

namespace {

bool type_matches(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  return false;
}

std::optional<std::string> validate_at(const nlohmann::json& value,
                                       const nlohmann::json& schema,
                                       const std::string& path) {
  if (!schema.is_object()) return std::nullopt;
  if (auto it = schema.find("type"); it != schema.end()) {
    std::string type = it->get<std::string>();
    if (!type_matches(value, type)) {
      return path + ": expected " + type + ", got " + std::string(value.type_name());
    }
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool hit = false;
    for (const auto& opt : *it) {
      if (opt == value) {
        hit = true;
        break;
      }
    }
    if (!hit) return path + ": value not in enum";
  }
  if (value.is_number()) {
    double v = value.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>()) {
      return path + ": below minimum";
    }
    if (auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>()) {
      return path + ": above maximum";
    }
  }
  if (value.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& key : *req) {
        if (!value.contains(key.get<std::string>())) {
          return path + ": missing required key '" + key.get<std::string>() + "'";
        }
      }
    }
    if (auto props = schema.find("properties"); props != schema.end()) {
      for (auto it = props->begin(); it != props->end(); ++it) {
        if (value.contains(it.key())) {
          if (auto err = validate_at(value.at(it.key()), it.value(), path + "." + it.key())) {
            return err;
          }
        }
      }
    }
  }
  if (value.is_array()) {
    if (auto it = schema.find("minItems");
        it != schema.end() && value.size() < it->get<size_t>()) {
      return path + ": fewer than minItems elements";
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (size_t i = 0; i < value.size(); ++i) {
        if (auto err = validate_at(value[i], *items, path + "[" + std::to_string(i) + "]")) {
          return err;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_schema(const nlohmann::json& value,
                                           const nlohmann::json& schema) {
  return validate_at(value, schema, "$");
}

std::optional<nlohmann::json> extract_json(const std::string& raw) {
  auto try_parse = [](const std::string& s) -> std::optional<nlohmann::json> {
    nlohmann::json j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  if (auto j = try_parse(raw)) return j;

  // fenced block
  size_t fence = raw.find("```");
  if (fence != std::string::npos) {
    size_t body = raw.find('\n', fence);
    size_t close = body == std::string::npos ? std::string::npos : raw.find("```", body);
    if (body != std::string::npos && close != std::string::npos) {
      if (auto j = try_parse(raw.substr(body + 1, close - body - 1))) return j;
    }
  }

  // first balanced object or array
  for (size_t i = 0; i < raw.size(); ++i) {
    char open = raw[i];
    if (open != '{' && open != '[') continue;
    char close = open == '{' ? '}' : ']';
    int depth = 0;
    bool in_string = false;
    for (size_t k = i; k < raw.size(); ++k) {
      char c = raw[k];
      if (in_string) {
        if (c == '\\') {
          ++k;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == open) {
        ++depth;
      } else if (c == close) {
        if (--depth == 0) {
          if (auto j = try_parse(raw.substr(i, k - i + 1))) return j;
          break;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace chartattrib::llm
