#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "covkit/errors.hpp"
#include "covkit/kernel.hpp"

namespace covkit {

/// Malformed model document. The message starts with the JSON pointer of the
/// offending node (or line and column for syntax errors).
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

struct ModelConfig {
  int m;
  Domain domain;
  KernelSpec model;
};

/// {"m": int, "dim_space": int, "dim_time": int, "model": node} where a node
/// is {"op": name, "params": {...}, "children": [...]}.
ModelConfig parse_model_config(const nlohmann::json& doc);
ModelConfig parse_model_config_text(std::string_view text);
ModelConfig load_model_config(const std::filesystem::path& path);

/// Parses one expression node for the given number of variables and domain.
KernelSpec parse_kernel(const nlohmann::json& node, int m, Domain domain);

nlohmann::json serialize_model_config(const KernelSpec& spec);

/// FNV-1a hash of the compact dump; stable across runs and platforms.
std::uint64_t config_hash(const nlohmann::json& doc);

}  // namespace covkit
