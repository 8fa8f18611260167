#pragma once

// Run configuration. Sources, lowest precedence first: built-in defaults,
// environment (endpoint and model only), config file (key=value), flags.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgattr/error.hpp"
#include "kgattr/graphstore.hpp"
#include "kgattr/model_client.hpp"
#include "kgattr/similarity.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

inline constexpr const char* kEndpointEnv = "KGATTR_ENDPOINT";
inline constexpr const char* kModelEnv = "KGATTR_MODEL";

using KeyValues = std::map<std::string, std::string, std::less<>>;

struct RunConfig {
  std::optional<std::filesystem::path> ontology;
  std::optional<std::filesystem::path> prompt_template;
  ClientConfig client;
  MatchMode match_mode = MatchMode::kQualified;
  std::size_t k = 40;
  std::vector<std::size_t> thresholds = default_thresholds();
  PlaceholderSet placeholders = default_placeholders();
  std::filesystem::path out = ".";

  void validate() const {
    if (k < 1) throw ValidationError("k must be >= 1");
    if (ontology && !std::filesystem::exists(*ontology)) {
      throw ValidationError("ontology file not found: " + ontology->string());
    }
    if (prompt_template && !std::filesystem::exists(*prompt_template)) {
      throw ValidationError("prompt template not found: " + prompt_template->string());
    }
    client.validate();
  }
};

inline KeyValues parse_config_text(std::string_view source, const std::vector<std::string>& lines) {
  KeyValues kv;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    auto line = trim(lines[n]);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(std::string(source), n + 1, "expected key=value");
    }
    auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(std::string(source), n + 1, "empty key");
    kv[key] = std::string(trim(line.substr(eq + 1)));
  }
  return kv;
}

inline KeyValues load_config_file(const std::filesystem::path& path) {
  return parse_config_text(path.string(), read_lines(path));
}

inline KeyValues environment_values() {
  KeyValues kv;
  if (const char* v = std::getenv(kEndpointEnv); v && *v) kv["endpoint"] = v;
  if (const char* v = std::getenv(kModelEnv); v && *v) kv["model"] = v;
  return kv;
}

namespace detail {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  auto s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("invalid value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::size_t> parse_thresholds(std::string_view text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(parse_number<std::size_t>("thresholds", part));
  }
  if (out.empty()) throw UsageError("thresholds list is empty");
  return out;
}

}  // namespace detail

inline void apply_values(RunConfig& cfg, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "ontology") {
      cfg.ontology = value;
    } else if (key == "template") {
      cfg.prompt_template = value;
    } else if (key == "endpoint") {
      cfg.client.endpoint = value;
    } else if (key == "model") {
      cfg.client.model = value;
    } else if (key == "timeout") {
      cfg.client.timeout_seconds = detail::parse_number<double>(key, value);
    } else if (key == "max_retries") {
      cfg.client.max_retries = detail::parse_number<int>(key, value);
    } else if (key == "max_concurrency") {
      cfg.client.max_concurrency = detail::parse_number<int>(key, value);
    } else if (key == "temperature") {
      cfg.client.temperature = detail::parse_number<double>(key, value);
    } else if (key == "seed") {
      if (value.empty() || value == "none") {
        cfg.client.seed.reset();
      } else {
        cfg.client.seed = detail::parse_number<std::int64_t>(key, value);
      }
    } else if (key == "retry_backoff_ms") {
      cfg.client.retry_backoff_ms = detail::parse_number<int>(key, value);
    } else if (key == "images_field") {
      cfg.client.images_field = value;
    } else if (key == "response_field") {
      cfg.client.response_field = value;
    } else if (key == "match_mode") {
      cfg.match_mode = parse_match_mode(value);
    } else if (key == "k") {
      cfg.k = detail::parse_number<std::size_t>(key, value);
    } else if (key == "thresholds") {
      cfg.thresholds = detail::parse_thresholds(value);
    } else if (key == "placeholders") {
      cfg.placeholders = parse_placeholders(value);
    } else if (key == "out") {
      cfg.out = value;
    } else {
      throw UsageError("unknown configuration key '" + key + "'");
    }
  }
}

// Relative paths in a config file resolve against the file's directory.
inline KeyValues resolve_config_paths(KeyValues kv, const std::filesystem::path& config_path) {
  auto base = config_path.parent_path();
  for (auto key : {"ontology", "template", "out"}) {
    if (auto it = kv.find(key); it != kv.end() && !it->second.empty()) {
      std::filesystem::path p = it->second;
      if (p.is_relative()) it->second = (base / p).lexically_normal().string();
    }
  }
  return kv;
}

inline RunConfig resolve_config(const KeyValues& env, const KeyValues& file, const KeyValues& flags) {
  RunConfig cfg;
  apply_values(cfg, env);
  apply_values(cfg, file);
  apply_values(cfg, flags);
  return cfg;
}

// key=value snapshot of the effective configuration, for run logs.
inline std::string format_config(const RunConfig& cfg) {
  std::vector<std::string> thresholds;
  for (auto t : cfg.thresholds) thresholds.push_back(std::to_string(t));
  std::vector<std::string> placeholders(cfg.placeholders.begin(), cfg.placeholders.end());
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) {
    out += std::string(k) + "=" + v + "\n";
  };
  put("ontology", cfg.ontology ? cfg.ontology->string() : "");
  put("template", cfg.prompt_template ? cfg.prompt_template->string() : "");
  put("endpoint", cfg.client.endpoint);
  put("model", cfg.client.model);
  put("timeout", format_fixed(cfg.client.timeout_seconds, 3));
  put("max_retries", std::to_string(cfg.client.max_retries));
  put("max_concurrency", std::to_string(cfg.client.max_concurrency));
  put("temperature", format_fixed(cfg.client.temperature, 3));
  put("seed", cfg.client.seed ? std::to_string(*cfg.client.seed) : "none");
  put("images_field", cfg.client.images_field);
  put("response_field", cfg.client.response_field);
  put("match_mode", std::string(to_string(cfg.match_mode)));
  put("k", std::to_string(cfg.k));
  put("thresholds", join(thresholds, ","));
  put("placeholders", join(placeholders, ","));
  return out;
}

}  // namespace kgattr
