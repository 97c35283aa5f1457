#pragma once

#include <filesystem>
#include <string>

#include "cimforge/macro.hpp"

namespace cimforge {

std::string to_string(ReferenceMode mode);
std::string to_string(AdcScheme scheme);
std::string to_string(ExecPolicy policy);

ReferenceMode parse_ref_mode(const std::string& name);   // "in_sram" | "ideal"
AdcScheme parse_scheme(const std::string& name);         // "coarse_fine" | "full_flash"
ExecPolicy parse_exec_policy(const std::string& name);   // "serial" | "parallel"

// Strict JSON configuration: every present key must be known and well typed
// (unknown keys are rejected so typos cannot silently fall back to a
// default), absent keys keep the values in `base`. Ranges are checked later
// by MacroConfig::validate so command-line overrides can still apply on top.
MacroConfig parse_macro_config(const std::string& json_text,
                               const MacroConfig& base = MacroConfig{});
MacroConfig load_macro_config(const std::filesystem::path& path,
                              const MacroConfig& base = MacroConfig{});

// Optional root key "out": the default primary output path for CLI commands,
// overridden by an explicit --out. Empty string when absent.
std::string parse_config_out(const std::string& json_text);

// Round-trips through parse_macro_config.
std::string macro_config_to_json(const MacroConfig& cfg);

}  // namespace cimforge
