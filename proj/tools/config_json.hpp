#pragma once

#include <CLI11.hpp>
#include <json.hpp>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

// Reads --config files as JSON when the first non-blank character is '{',
// otherwise as TOML. Nested JSON objects become TOML-style sections. Keys at
// the top level belong to `section` (the subcommand being run); a top-level
// object named after the section is accepted too.
class ConfigJsonOrToml : public CLI::ConfigTOML {
 public:
  explicit ConfigJsonOrToml(std::string section) : section_(std::move(section)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = parse(input);
    for (auto& item : items) {
      if (!section_.empty() && (item.parents.empty() || item.parents.front() != section_)) {
        item.parents.insert(item.parents.begin(), section_);
      }
    }
    return items;
  }

 private:
  std::vector<CLI::ConfigItem> parse(std::istream& input) const {
    const std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream toml(text);
      return CLI::ConfigTOML::from_config(toml);
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config values must be scalars or arrays of scalars");
  }

  static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        flatten(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& element : value) item.inputs.push_back(scalar(element));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  std::string section_;
};
