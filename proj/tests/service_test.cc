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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "recourse/error.h"
#include "recourse/io.h"
#include "recourse/service.h"
#include "server_harness.h"
#include "shapes.h"

namespace recourse {
namespace {

namespace fs = std::filesystem;

const fs::path kDemo = RECOURSE_DEMO_DIR;

Json scenario_json(int n) {
  return read_json_file(kDemo / "scenarios" /
                        ("scenario-" + std::to_string(n) + ".json"));
}

class Service : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    server_ = new testing::ServerHarness(kDemo / "config.json");
  }
  static void TearDownTestSuite() { delete server_; }

  static void expect_shape(const Json& body, const Json& shape) {
    for (const auto& e : testing::shape_errors(body, shape)) ADD_FAILURE() << e;
  }

  static testing::ServerHarness* server_;
  const Json s3_ = scenario_json(3);
  const Json profile_ = s3_.at("profile");
};

testing::ServerHarness* Service::server_ = nullptr;

TEST_F(Service, PredictDeniesScenarioThree) {
  auto [status, body] = server_->post("/predict", {{"profile", profile_}});
  EXPECT_EQ(status, 200);
  expect_shape(body, testing::predict_shape());
  EXPECT_EQ(body["label"], 0);
  EXPECT_EQ(body["decision"], "deny");
}

TEST_F(Service, WhatIfAppliesChanges) {
  auto [status, body] = server_->post(
      "/whatif", {{"profile", profile_}, {"changes", {{"income", 42000}}}});
  EXPECT_EQ(status, 200);
  expect_shape(body, testing::whatif_shape());
  EXPECT_EQ(body["label"], 1);
  EXPECT_EQ(body["profile"]["income"], 42000);
  EXPECT_EQ(body["committed"], false);
}

TEST_F(Service, CommitNeedsSession) {
  auto [status, body] = server_->post(
      "/whatif", {{"profile", profile_}, {"changes", Json::object()},
                  {"commit", true}});
  EXPECT_EQ(status, 400);
  expect_shape(body, testing::error_shape());
}

TEST_F(Service, PdpReportsThreshold) {
  auto [status, body] = server_->get(
      "/pdp/income?points=5&profile=" +
      httplib::detail::encode_url(profile_.dump()));
  EXPECT_EQ(status, 200);
  expect_shape(body, testing::pdp_shape());
  EXPECT_NEAR(body["threshold"].get<double>(), 42000, 1.0);
  EXPECT_EQ(body["points"].size(), 5u);
  auto [missing, error] = server_->get(
      "/pdp/wealth?profile=" + httplib::detail::encode_url(profile_.dump()));
  EXPECT_EQ(missing, 404);
  auto [categorical, bad] = server_->get(
      "/pdp/purpose?profile=" + httplib::detail::encode_url(profile_.dump()));
  EXPECT_EQ(categorical, 400);
}

TEST_F(Service, CounterfactualsAndFlipset) {
  auto [s1, cfs] = server_->post(
      "/counterfactuals", {{"profile", profile_}, {"k", 2},
                           {"focus", s3_["focus"]}, {"grid", {{"income", 500}}}});
  EXPECT_EQ(s1, 200);
  expect_shape(cfs, testing::counterfactuals_shape());
  EXPECT_EQ(cfs["counterfactuals"][0]["target"]["income"], 42000);
  auto [s2, fs] = server_->post("/flipset", {{"profile", profile_}, {"budget", 0}});
  EXPECT_EQ(s2, 200);
  EXPECT_EQ(fs["found"], false);
  EXPECT_TRUE(fs["flipset"].is_null());
  auto [s3, bad] = server_->post("/counterfactuals", {{"profile", profile_}, {"k", 0}});
  EXPECT_EQ(s3, 400);
}

TEST_F(Service, PlanAndExplain) {
  auto [s1, plan] = server_->post(
      "/plan", {{"profile", profile_}, {"focus", s3_["focus"]}, {"solver", "q"}});
  EXPECT_EQ(s1, 200);
  expect_shape(plan, testing::plan_shape());
  EXPECT_EQ(plan["solver"], "q");
  auto [s2, explain] = server_->post(
      "/explain", {{"profile", profile_}, {"scenario", "scenario-3"},
                   {"focus", s3_["focus"]}, {"kind", "nd"}});
  EXPECT_EQ(s2, 200);
  expect_shape(explain, testing::explain_shape());
  ASSERT_EQ(explain["explanations"].size(), 1u);
  EXPECT_EQ(explain["explanations"][0]["text"],
            "For your loan application to be accepted, your income needs to be "
            "higher than $42000. If your income had been above $42000, we "
            "could have given you a loan.");
  auto [s3, bad] = server_->post("/plan", {{"profile", profile_}, {"solver", "x"}});
  EXPECT_EQ(s3, 400);
}

TEST_F(Service, SessionsRecordCommits) {
  auto [s1, created] = server_->post("/sessions", {{"profile", profile_}});
  EXPECT_EQ(s1, 201);
  expect_shape(created, testing::session_shape());
  const std::string id = created["id"];
  auto [s2, preview] = server_->post(
      "/whatif", {{"session_id", id}, {"changes", {{"income", 50000}}}});
  EXPECT_EQ(preview["committed"], false);
  EXPECT_EQ(preview["history_length"], 0);
  auto [s3, commit] = server_->post(
      "/whatif",
      {{"session_id", id}, {"changes", {{"income", 50000}}}, {"commit", true}});
  EXPECT_EQ(commit["history_length"], 1);
  auto [s4, predict] = server_->post("/predict", {{"session_id", id}});
  EXPECT_EQ(predict["label"], 1);
  auto [s5, fetched] = server_->get("/sessions/" + id);
  EXPECT_EQ(fetched["profile"]["income"], 50000);
  EXPECT_EQ(fetched["history"][0]["kind"], "whatif");
  auto [s6, missing] = server_->get("/sessions/ffffffffffffffff");
  EXPECT_EQ(s6, 404);
  expect_shape(missing, testing::error_shape());
}

TEST_F(Service, MalformedBodiesAreRejected) {
  auto res = server_->client().Post("/predict", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  auto [status, body] = server_->post("/predict", Json::object());
  EXPECT_EQ(status, 400);
  auto [s2, schema] = server_->get("/schema");
  EXPECT_EQ(s2, 200);
  expect_shape(schema, testing::schema_shape());
}

class SessionLog : public ::testing::Test {
 protected:
  void SetUp() override {
    log_ = fs::temp_directory_path() /
           ("recourse_sessions_" + std::to_string(::getpid()) + ".ndjson");
    fs::remove(log_);
    const Engine engine = Engine::load(load_config(kDemo / "config.json"));
    schema_ = engine.schema_ptr();
    profile_ = profile_from_json(*schema_, scenario_json(3).at("profile"));
  }
  void TearDown() override { fs::remove(log_); }

  fs::path log_;
  std::shared_ptr<const FeatureSchema> schema_;
  FeatureVector profile_;
};

TEST_F(SessionLog, ReplaysAfterRestart) {
  std::string id;
  {
    SessionStore store(schema_, "m1", log_);
    id = store.create(profile_).id;
    FeatureVector richer = profile_;
    richer[schema_->index_of("income")] = 60000;
    store.commit(id, richer, {now_timestamp(), "whatif", {{"income", 60000}},
                              digest_of({{"income", 60000}})});
  }
  std::ofstream(log_, std::ios::app) << "{\"op\": \"commit\", \"id\"";
  SessionStore reopened(schema_, "m1", log_);
  auto snapshot = reopened.get(id);
  ASSERT_TRUE(snapshot.has_value());
  EXPECT_EQ(snapshot->history.size(), 1u);
  EXPECT_DOUBLE_EQ(snapshot->profile[schema_->index_of("income")], 60000);
  EXPECT_EQ(snapshot->model, "m1");
}

TEST_F(SessionLog, ConcurrentCommitsAreSerialized) {
  SessionStore store(schema_, "m1", log_);
  const std::string id = store.create(profile_).id;
  std::vector<std::thread> workers;
  for (int t = 0; t < 8; ++t) {
    workers.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        const Json change = {{"worker", t}, {"step", i}};
        store.commit(id, profile_, {now_timestamp(), "whatif", change,
                                    digest_of(change)});
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(store.get(id)->history.size(), 200u);
  SessionStore reopened(schema_, "m1", log_);
  EXPECT_EQ(reopened.get(id)->history.size(), 200u);
  EXPECT_THROW(store.commit("nope", profile_, {}), RecourseError);
}

TEST(Digest, TracksContent) {
  EXPECT_EQ(digest_of(Json::parse(R"({"a": 1})")),
            digest_of(Json::parse(R"({"a": 1})")));
  EXPECT_NE(digest_of(Json::parse(R"({"a": 1})")),
            digest_of(Json::parse(R"({"a": 2})")));
}

}  // namespace
}  // namespace recourse
