// Copyright 2026 The qrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qrisk-server: HTTP/1.1 JSON API.
//
// Configuration (flag, then environment, then default):
//   --listen / QRISK_LISTEN                        127.0.0.1:8080
//   --store / QRISK_STORE_DIR                      ./qrisk-store
//   --default-curve / QRISK_DEFAULT_CURVE          built-in PCR curve
//   --default-threshold / QRISK_DEFAULT_THRESHOLD  0.9

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"

#include "qrisk/service.hpp"
#include "qrisk/store.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrisk JSON API server"};
  std::string listen = env_or("QRISK_LISTEN", "127.0.0.1:8080");
  std::string store_dir = env_or("QRISK_STORE_DIR", "qrisk-store");
  std::string default_curve = env_or("QRISK_DEFAULT_CURVE", "");
  double default_threshold = std::stod(env_or("QRISK_DEFAULT_THRESHOLD", "0.9"));
  app.add_option("--listen", listen, "host:port to listen on");
  app.add_option("--store", store_dir, "Scenario/curve store directory");
  app.add_option("--default-curve", default_curve, "CSV replacing the built-in default curve");
  app.add_option("--default-threshold", default_threshold, "Threshold when none is given")
      ->check(CLI::Range(0.0, 1.0));
  CLI11_PARSE(app, argc, argv);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::fprintf(stderr, "error: --listen must be host:port\n");
    return 1;
  }
  const std::string host = listen.substr(0, colon);
  const int port = std::atoi(listen.c_str() + colon + 1);

  try {
    qrisk::ScenarioStore scenarios(store_dir);
    const qrisk::CurveStore curves(
        store_dir, default_curve.empty() ? std::nullopt
                                         : std::optional<std::filesystem::path>(default_curve));
    qrisk::Service service(scenarios, curves, {default_threshold});

    httplib::Server server;
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
      const auto out = service.handle(req.method, req.path, req.body);
      res.status = out.status;
      res.set_content(out.body, "application/json");
    };
    server.Get(R"(/v1/.*)", forward);
    server.Post(R"(/v1/.*)", forward);
    server.Put(R"(/v1/.*)", forward);

    std::printf("listening on %s:%d (store %s)\n", host.c_str(), port, store_dir.c_str());
    std::fflush(stdout);
    if (!server.listen(host, port)) {
      std::fprintf(stderr, "error: cannot listen on %s\n", listen.c_str());
      return 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
