#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "mesotree/kernels.hpp"

namespace mesotree {

/// Flat key-value settings. File format: one `key = value` per line; blank
/// lines and lines starting with `#` are ignored.
using KeyValues = std::map<std::string, std::string>;

/// Recognised keys, in echo order.
const std::vector<std::string>& config_keys();

/// Throws ConfigError on malformed lines, duplicate or unknown keys.
KeyValues read_key_values(std::istream& in);
/// Throws ConfigError if the file cannot be opened.
KeyValues load_config_file(const std::filesystem::path& path);

struct RunSettings {
    GrowthConfig growth;
    int replicates = 1;
};

/// Missing keys take their defaults; throws ConfigError for unknown keys or
/// invalid values.
RunSettings settings_from(const KeyValues& kv);

/// Every key with its resolved value; settings_from(to_key_values(s))
/// reproduces s.
KeyValues to_key_values(const RunSettings& settings);

/// `key = value` lines in config_keys() order.
std::string echo_text(const RunSettings& settings);

/// FNV-1a 64 of echo_text, as 16 hex digits.
std::string config_hash(const RunSettings& settings);

/// Delay law from a compact spec: zero | const:c | uniform | invpow:p |
/// pareto:g,s | table:u:q,u:q,...
DelayLaw parse_delay(const std::string& spec, double beta);
/// Inverse of parse_delay.
std::string delay_spec(const DelayLaw& delay);

}  // namespace mesotree
