#pragma once

#include <map>
#include <string>
#include <vector>

namespace chartattrib::prompts {

struct Template {
  std::string system;
  std::string user;  // with {placeholder} slots
};

/// Named prompt template. Throws on unknown names.
const Template& get(const std::string& name);

std::vector<std::string> names();

/// Replaces every {key} with vars.at(key); unknown placeholders throw so
/// template drift fails loudly in tests.
std::string render(const std::string& text, const std::map<std::string, std::string>& vars);

}  // namespace chartattrib::prompts
