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

#ifndef RECOURSE_SERVICE_H_
#define RECOURSE_SERVICE_H_

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "recourse/engine.h"
#include "recourse/io.h"

namespace httplib {
class Server;
}

namespace recourse {

struct SessionEvent {
  std::string timestamp;
  std::string kind;
  Json request;
  std::string digest;
};

struct SessionSnapshot {
  std::string id;
  std::string model;
  FeatureVector profile;
  std::vector<SessionEvent> history;
};

// Sessions with an append-only newline-delimited JSON log. Existing logs
// are replayed on construction. Writes to one session are serialized;
// different sessions proceed independently.
class SessionStore {
 public:
  // An empty log path keeps sessions in memory only.
  SessionStore(std::shared_ptr<const FeatureSchema> schema, std::string model,
               std::filesystem::path log = {});

  SessionSnapshot create(const FeatureVector& profile);
  std::optional<SessionSnapshot> get(const std::string& id) const;
  // Replaces the profile and appends one history event. Throws kInvalidInput
  // for an unknown id.
  SessionSnapshot commit(const std::string& id, const FeatureVector& profile,
                         SessionEvent event);

  std::size_t size() const;

 private:
  struct Entry {
    std::mutex mutex;
    SessionSnapshot state;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void append(const Json& line);
  void replay();

  std::shared_ptr<const FeatureSchema> schema_;
  std::string model_;
  std::filesystem::path log_path_;
  mutable std::mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex log_mutex_;
  std::ofstream log_;
};

std::string now_timestamp();
std::string digest_of(const Json& value);

// Registers every endpoint on `server`. Both objects must outlive it.
void register_routes(httplib::Server& server, const Engine& engine,
                     SessionStore& sessions);

// Blocks serving on config().bind. Throws kInvalidInput when binding fails.
void serve(const Engine& engine, SessionStore& sessions);

}  // namespace recourse

#endif  // RECOURSE_SERVICE_H_
