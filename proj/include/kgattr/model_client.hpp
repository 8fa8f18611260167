#pragma once

// Client for a local multimodal model server (Ollama-style /api/generate).
//
// Request:  POST <endpoint> {"model", "prompt", "images": [base64], "temperature",
//                            "stream": false, "options": {"temperature", "seed"}}
// Response: {"response": "<text>"}
//
// The images and response field names are configurable.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "kgattr/error.hpp"
#include "kgattr/extraction.hpp"
#include "kgattr/ontology.hpp"
#include "kgattr/text.hpp"

namespace kgattr {

struct ClientConfig {
  std::string endpoint = "http://127.0.0.1:11434/api/generate";
  std::string model = "llama3.2-vision";
  double timeout_seconds = 120.0;
  int max_retries = 2;
  int max_concurrency = 4;
  double temperature = 0.0;
  std::optional<std::int64_t> seed = 0;
  int retry_backoff_ms = 250;
  std::string images_field = "images";
  std::string response_field = "response";

  void validate() const {
    if (!(timeout_seconds > 0)) throw ValidationError("timeout must be > 0");
    if (max_retries < 0) throw ValidationError("max retries must be >= 0");
    if (max_concurrency < 1) throw ValidationError("max concurrent requests must be >= 1");
    if (endpoint.empty()) throw ValidationError("endpoint URL is empty");
    if (model.empty()) throw ValidationError("model name is empty");
  }
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // begins with '/'
};

inline Endpoint parse_endpoint(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("endpoint URL needs a scheme: '" + std::string(url) + "'");
  }
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http") {
    throw ValidationError("unsupported endpoint scheme '" + std::string(scheme) +
                          "' (only http is supported)");
  }
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  ep.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (ep.origin.size() <= scheme_end + 3) {
    throw ValidationError("endpoint URL has no host: '" + std::string(url) + "'");
  }
  return ep;
}

inline std::string request_body(const ClientConfig& config, std::string_view prompt,
                                std::string_view image_bytes) {
  nlohmann::json body;
  body["model"] = config.model;
  body["prompt"] = prompt;
  body[config.images_field] = nlohmann::json::array(
      {httplib::detail::base64_encode(std::string(image_bytes))});
  body["temperature"] = config.temperature;
  body["stream"] = false;
  nlohmann::json options;
  options["temperature"] = config.temperature;
  if (config.seed) options["seed"] = *config.seed;
  body["options"] = std::move(options);
  return body.dump();
}

inline std::string response_text(const ClientConfig& config, std::string_view body) {
  auto doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ProtocolError("response body is not JSON");
  if (!doc.is_object()) throw ProtocolError("response body is not a JSON object");
  auto it = doc.find(config.response_field);
  if (it == doc.end()) throw ProtocolError("response has no '" + config.response_field + "' field");
  if (!it->is_string()) throw ProtocolError("'" + config.response_field + "' is not a string");
  return it->get<std::string>();
}

// One request with retries. Transport failures and 5xx responses are retried;
// other non-2xx statuses fail immediately.
inline std::string query_model(const ClientConfig& config, std::string_view prompt,
                               std::string_view image_bytes) {
  auto ep = parse_endpoint(config.endpoint);
  auto body = request_body(config, prompt, image_bytes);
  auto secs = static_cast<time_t>(config.timeout_seconds);
  auto usecs = static_cast<time_t>((config.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && config.retry_backoff_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config.retry_backoff_ms * attempt));
    }
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    auto res = cli.Post(ep.path, body, "application/json");
    if (!res) {
      last_error = "request to " + config.endpoint + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return response_text(config, res->body);
    std::string msg = "endpoint returned HTTP " + std::to_string(res->status);
    if (res->status < 500 || attempt == config.max_retries) {
      throw EndpointError(res->status, msg);
    }
    last_error = msg;
  }
  throw TransportError(last_error + " (after " + std::to_string(config.max_retries + 1) +
                       " attempt(s))");
}

struct ImageInput {
  std::string id;
  std::string bytes;
};

// Throws on transport, endpoint or protocol failures.
inline ExtractionRecord extract_image(const ImageInput& image, const Ontology& ontology,
                                      std::string_view prompt, const ClientConfig& config,
                                      const PlaceholderSet& placeholders = default_placeholders()) {
  if (image.bytes.empty()) throw DomainError("image '" + image.id + "' is empty");
  auto text = query_model(config, prompt, image.bytes);
  return assemble_record(image.id, std::move(text), ontology, placeholders);
}

inline Failure classify_failure(const std::exception& e) {
  if (auto* ep = dynamic_cast<const EndpointError*>(&e)) {
    return {FailureKind::kEndpoint, ep->what(), ep->status()};
  }
  if (dynamic_cast<const ProtocolError*>(&e)) return {FailureKind::kProtocol, e.what(), 0};
  if (dynamic_cast<const TransportError*>(&e)) return {FailureKind::kTransport, e.what(), 0};
  return {FailureKind::kOther, e.what(), 0};
}

// Runs extract_image over every input with up to max_concurrency requests in
// flight. Output order equals input order; failures become records with
// `failure` set and never abort the batch.
inline std::vector<ExtractionRecord> extract_batch(
    std::span<const ImageInput> images, const Ontology& ontology, std::string_view prompt,
    const ClientConfig& config, const PlaceholderSet& placeholders = default_placeholders()) {
  config.validate();
  std::vector<ExtractionRecord> records(images.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      try {
        records[i] = extract_image(images[i], ontology, prompt, config, placeholders);
      } catch (const std::exception& e) {
        records[i].image_id = images[i].id;
        records[i].failure = classify_failure(e);
      }
    }
  };
  auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrency),
                                         images.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  return records;
}

inline bool is_image_file(const std::filesystem::path& p) {
  static const std::vector<std::string> exts = {".png", ".jpg", ".jpeg", ".webp", ".bmp", ".gif"};
  auto ext = to_lower(p.extension().string());
  return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

// Image id is the file stem. Files are ordered by name.
inline std::vector<ImageInput> load_image_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ImageInput> images;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto id = f.stem().string();
    if (id.find_first_of("\t\n\r") != std::string::npos) {
      throw ValidationError("image id contains tab or newline: " + f.string());
    }
    if (!ids.insert(id).second) {
      throw ConflictError("two images share the id '" + id + "'");
    }
    images.push_back({std::move(id), read_file(f)});
  }
  return images;
}

}  // namespace kgattr
