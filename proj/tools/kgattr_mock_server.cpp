// Serves canned model responses from a manifest until interrupted.

#include <csignal>
#include <iostream>
#include <string>

#include <unistd.h>

#include "CLI11.hpp"
#include "mock_model_server.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock multimodal model server"};
  std::string manifest;
  kgattr::mock::Faults faults;
  app.add_option("manifest", manifest, "image<TAB>guided[<TAB>free] manifest")->required();
  app.add_option("--status", faults.status, "Answer every request with this HTTP status");
  app.add_option("--fail-first", faults.fail_first, "Answer the first N requests with 503");
  app.add_flag("--bad-body", faults.bad_body, "Answer with a non-JSON body");
  CLI11_PARSE(app, argc, argv);

  try {
    kgattr::mock::Server server(kgattr::mock::load_manifest(manifest), faults);
    std::cout << server.endpoint() << std::endl;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) pause();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
