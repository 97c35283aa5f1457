#include "cimforge/config.hpp"

#include <initializer_list>

#include "json.hpp"

#include "cimforge/errors.hpp"
#include "cimforge/tensor.hpp"

namespace cimforge {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const char* scope,
                         std::initializer_list<const char*> known) {
  for (const auto& item : j.items()) {
    bool found = false;
    for (const char* k : known) {
      if (item.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError(std::string("unknown config key '") + scope +
                        item.key() + "'");
    }
  }
}

double need_number(const json& j, const char* key, const char* scope,
                   double fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("config key '") + scope + key +
                      "' must be a number");
  }
  return j.at(key).get<double>();
}

int need_int(const json& j, const char* key, const char* scope, int fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("config key '") + scope + key +
                      "' must be an integer");
  }
  return j.at(key).get<int>();
}

bool need_bool(const json& j, const char* key, const char* scope,
               bool fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_boolean()) {
    throw ConfigError(std::string("config key '") + scope + key +
                      "' must be a boolean");
  }
  return j.at(key).get<bool>();
}

std::string need_string(const json& j, const char* key, const char* scope,
                        const std::string& fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  if (!j.at(key).is_string()) {
    throw ConfigError(std::string("config key '") + scope + key +
                      "' must be a string");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::string to_string(ReferenceMode mode) {
  return mode == ReferenceMode::InSram ? "in_sram" : "ideal";
}

std::string to_string(AdcScheme scheme) {
  return scheme == AdcScheme::CoarseFine ? "coarse_fine" : "full_flash";
}

std::string to_string(ExecPolicy policy) {
  return policy == ExecPolicy::Serial ? "serial" : "parallel";
}

ReferenceMode parse_ref_mode(const std::string& name) {
  if (name == "in_sram") {
    return ReferenceMode::InSram;
  }
  if (name == "ideal") {
    return ReferenceMode::Ideal;
  }
  throw ConfigError("ref_mode must be 'in_sram' or 'ideal', got '" + name + "'");
}

AdcScheme parse_scheme(const std::string& name) {
  if (name == "coarse_fine") {
    return AdcScheme::CoarseFine;
  }
  if (name == "full_flash") {
    return AdcScheme::FullFlash;
  }
  throw ConfigError("scheme must be 'coarse_fine' or 'full_flash', got '" +
                    name + "'");
}

ExecPolicy parse_exec_policy(const std::string& name) {
  if (name == "serial") {
    return ExecPolicy::Serial;
  }
  if (name == "parallel") {
    return ExecPolicy::Parallel;
  }
  throw ConfigError("execution must be 'serial' or 'parallel', got '" + name +
                    "'");
}

MacroConfig parse_macro_config(const std::string& json_text,
                               const MacroConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  // "out" belongs to the CLI layer (parse_config_out) but is part of the
  // same document, so it must not trip the unknown-key check here.
  reject_unknown_keys(j, "", {"vdd", "activated_rows", "cap_ratio", "adc",
                              "noise", "seed", "execution", "out"});
  MacroConfig cfg = base;
  cfg.vdd = need_number(j, "vdd", "", cfg.vdd);
  cfg.activated_rows = need_int(j, "activated_rows", "", cfg.activated_rows);
  cfg.cap_ratio = need_number(j, "cap_ratio", "", cfg.cap_ratio);
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ConfigError("config key 'seed' must be a non-negative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  cfg.execution =
      parse_exec_policy(need_string(j, "execution", "", to_string(cfg.execution)));
  if (j.contains("adc")) {
    const json& ja = j.at("adc");
    if (!ja.is_object()) {
      throw ConfigError("config key 'adc' must be an object");
    }
    reject_unknown_keys(ja, "adc.", {"bits", "cutoff", "ref_mode", "scheme"});
    cfg.adc.bits = need_int(ja, "bits", "adc.", cfg.adc.bits);
    cfg.adc.cutoff = need_number(ja, "cutoff", "adc.", cfg.adc.cutoff);
    cfg.adc.ref_mode = parse_ref_mode(
        need_string(ja, "ref_mode", "adc.", to_string(cfg.adc.ref_mode)));
    cfg.adc.scheme = parse_scheme(
        need_string(ja, "scheme", "adc.", to_string(cfg.adc.scheme)));
  }
  if (j.contains("noise")) {
    const json& jn = j.at("noise");
    if (!jn.is_object()) {
      throw ConfigError("config key 'noise' must be an object");
    }
    reject_unknown_keys(jn, "noise.", {"enabled", "abl_sigma_mv", "cmp_sigma_mv"});
    cfg.noise.enabled = need_bool(jn, "enabled", "noise.", cfg.noise.enabled);
    cfg.noise.abl_sigma_mv =
        need_number(jn, "abl_sigma_mv", "noise.", cfg.noise.abl_sigma_mv);
    cfg.noise.cmp_sigma_mv =
        need_number(jn, "cmp_sigma_mv", "noise.", cfg.noise.cmp_sigma_mv);
  }
  return cfg;
}

MacroConfig load_macro_config(const std::filesystem::path& path,
                              const MacroConfig& base) {
  return parse_macro_config(read_text_file(path), base);
}

std::string parse_config_out(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  return need_string(j, "out", "", "");
}

std::string macro_config_to_json(const MacroConfig& cfg) {
  json j;
  j["vdd"] = cfg.vdd;
  j["activated_rows"] = cfg.activated_rows;
  j["cap_ratio"] = cfg.cap_ratio;
  j["adc"] = {{"bits", cfg.adc.bits},
              {"cutoff", cfg.adc.cutoff},
              {"ref_mode", to_string(cfg.adc.ref_mode)},
              {"scheme", to_string(cfg.adc.scheme)}};
  j["noise"] = {{"enabled", cfg.noise.enabled},
                {"abl_sigma_mv", cfg.noise.abl_sigma_mv},
                {"cmp_sigma_mv", cfg.noise.cmp_sigma_mv}};
  j["seed"] = cfg.seed;
  j["execution"] = to_string(cfg.execution);
  return j.dump(2) + "\n";
}

}  // namespace cimforge
