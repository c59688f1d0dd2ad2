/*
 * Copyright 2026 The Recourse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RECOURSE_TESTS_SERVER_HARNESS_H_
#define RECOURSE_TESTS_SERVER_HARNESS_H_

#include <chrono>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>

#include "recourse/engine.h"
#include "recourse/io.h"
#include "recourse/service.h"

namespace recourse::testing {

// The lending demo served on an ephemeral loopback port.
class ServerHarness {
 public:
  explicit ServerHarness(const std::filesystem::path& config_path)
      : engine_(Engine::load(load_config(config_path))),
        sessions_(engine_.schema_ptr(), engine_.fingerprint()) {
    register_routes(server_, engine_, sessions_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("could not bind a test port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    for (int i = 0; i < 500 && !server_.is_running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
  }

  ~ServerHarness() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  ServerHarness(const ServerHarness&) = delete;
  ServerHarness& operator=(const ServerHarness&) = delete;

  const Engine& engine() const { return engine_; }
  httplib::Client& client() { return *client_; }

  // Status and parsed body of a POST with a JSON payload.
  std::pair<int, Json> post(const std::string& path, const Json& body) {
    auto res = client_->Post(path, body.dump(), "application/json");
    if (!res) throw std::runtime_error("no response from " + path);
    return {res->status, Json::parse(res->body)};
  }

  std::pair<int, Json> get(const std::string& path) {
    auto res = client_->Get(path);
    if (!res) throw std::runtime_error("no response from " + path);
    return {res->status, Json::parse(res->body)};
  }

 private:
  Engine engine_;
  SessionStore sessions_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace recourse::testing

#endif  // RECOURSE_TESTS_SERVER_HARNESS_H_
