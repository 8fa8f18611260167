#pragma once

// Canned stand-in for a local multimodal model server. Responses are looked
// up by the base64 image payload; prompts that list the ontology get the
// guided response, anything else the free one.
//
// Manifest: image_file<TAB>guided_response_file[<TAB>free_response_file],
// paths relative to the manifest.

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kgattr/error.hpp"
#include "kgattr/text.hpp"

namespace kgattr::mock {

inline constexpr std::string_view kGuidedMarker = "Allowed relationships";

struct CannedResponse {
  std::string guided;
  std::string free;
};

// Keyed by base64-encoded image bytes.
using ResponseTable = std::map<std::string, CannedResponse>;

inline ResponseTable load_manifest(const std::filesystem::path& manifest) {
  ResponseTable table;
  auto base = manifest.parent_path();
  auto lines = read_lines(manifest);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty() || line.front() == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 2 && f.size() != 3) {
      throw ParseError(manifest.string(), n + 1, "expected image<TAB>guided[<TAB>free]");
    }
    auto key = httplib::detail::base64_encode(read_file(base / std::string(trim(f[0]))));
    CannedResponse r;
    r.guided = read_file(base / std::string(trim(f[1])));
    if (f.size() == 3) r.free = read_file(base / std::string(trim(f[2])));
    table[key] = std::move(r);
  }
  return table;
}

struct Faults {
  int status = 0;        // nonzero: every request answers with this status
  int fail_first = 0;    // this many initial requests answer 503
  bool bad_body = false; // answer 200 with a non-JSON body
};

class Server {
 public:
  explicit Server(ResponseTable table, Faults faults = {})
      : table_(std::move(table)), faults_(faults) {
    server_.Post("/api/generate", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw TransportError("mock server could not bind a port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  ~Server() { stop(); }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return port_; }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/api/generate";
  }
  std::size_t requests() const noexcept { return requests_.load(); }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    auto n = requests_++;
    if (faults_.status != 0) {
      res.status = faults_.status;
      res.set_content("{\"error\":\"injected\"}", "application/json");
      return;
    }
    if (n < static_cast<std::size_t>(faults_.fail_first)) {
      res.status = 503;
      res.set_content("{\"error\":\"busy\"}", "application/json");
      return;
    }
    if (faults_.bad_body) {
      res.status = 200;
      res.set_content("not json", "text/plain");
      return;
    }
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("images") || !body["images"].is_array() ||
        body["images"].empty() || !body.contains("prompt")) {
      res.status = 400;
      res.set_content("{\"error\":\"bad request\"}", "application/json");
      return;
    }
    auto it = table_.find(body["images"][0].get<std::string>());
    if (it == table_.end()) {
      res.status = 404;
      res.set_content("{\"error\":\"unknown image\"}", "application/json");
      return;
    }
    bool guided = body["prompt"].get<std::string>().find(kGuidedMarker) != std::string::npos;
    nlohmann::json out;
    out["model"] = body.value("model", "");
    out["response"] = guided ? it->second.guided : it->second.free;
    out["done"] = true;
    res.set_content(out.dump(), "application/json");
  }

  ResponseTable table_;
  Faults faults_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace kgattr::mock
