#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dkp/pipeline.hpp"

namespace dkp {

/// Plain-text run configuration: one `key = value` per line, `#` starts a
/// comment. Keys mirror RunConfig, e.g. `scale`, `iterations`, `rks.L`,
/// `pke.step_prior`, `restorer.tv_weight`. Unknown keys are errors.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Applies entries on top of `cfg`. Throws ParameterError on unknown keys or
/// malformed values.
void apply_key_values(RunConfig& cfg, const KeyValues& kv);

/// `key=value` overrides as given on the command line.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& assignments);

/// Every key with its current value, in the same syntax parse_key_values reads.
std::string dump_config(const RunConfig& cfg);

}  // namespace dkp
