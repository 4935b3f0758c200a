#include "relay/types.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace relay;
using namespace relay::test;

TEST_CASE("validate accepts a consistent success record", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0, 0, 0}), "policy_a", true);
  CHECK(validate(rec).empty());
}

TEST_CASE("validate flags success with a failure stage", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0, 0, 0}), "policy_a", true);
  rec.report.failure_stage = FailureStage::grasp;
  auto violations = validate(rec);
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const auto& v : violations) found = found || v.find("failure_stage none") != std::string::npos;
  CHECK(found);
}

TEST_CASE("validate flags a non-unit representation", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0, 0, 0}), "policy_a", true);
  rec.representation.vector = {0.5, 0.0, 0.0, 0.0};  // norm 0.5
  auto violations = validate(rec);
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const auto& v : violations) found = found || v == "unit norm";
  CHECK(found);
}

TEST_CASE("validate flags grasp stage with nonzero progress", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0, 0, 0}), "policy_a", false);
  rec.report.failure_stage = FailureStage::grasp;
  rec.report.progress = 0.4;
  auto violations = validate(rec);
  bool found = false;
  for (const auto& v : violations) found = found || v.find("grasp") != std::string::npos;
  CHECK(found);
}

TEST_CASE("validate flags metadata count mismatch and duplicate scene objects", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0, 0, 0}), "policy_a", true);
  rec.representation.metadata.involved_objects = {"hammer"};
  rec.representation.metadata.object_count = 3;
  CHECK_FALSE(validate(rec).empty());

  TaskInstance t = make_task("t1", "lift the pot",
                             make_scene({{"pot", "cookware"}, {"pot", "cookware"}}));
  auto violations = validate(t);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("duplicate") != std::string::npos);
}

TEST_CASE("trace invariants: frames, ordering, elapsed span", "[types]") {
  EpisodeTrace tr;
  CHECK_FALSE(validate(tr).empty());

  tr.frames = {TraceFrame{0.0, {}}, TraceFrame{1.0, {}}, TraceFrame{1.0, {}}};
  tr.elapsed_s = 1.0;
  auto violations = validate(tr);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("increasing") != std::string::npos);

  tr.frames = {TraceFrame{0.0, {}}, TraceFrame{2.5, {}}};
  tr.elapsed_s = 2.0;
  violations = validate(tr);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("elapsed") != std::string::npos);

  tr.elapsed_s = 2.5;
  CHECK(validate(tr).empty());
}

TEST_CASE("serialization round-trips a full record byte-for-byte", "[types]") {
  auto rec = make_record("r-42", rep_from_vector({0.3, -1.25, 4.0, 0.0}), "policy_b", false, 777);
  rec.report.metrics = {{"min_distance", 0.004}, {"contact", 1.0}};
  rec.representation.metadata.involved_objects = {"hammer", "block"};
  rec.representation.metadata.object_count = 2;
  rec.representation.metadata.tags = {"tool"};

  std::string text = serialize(rec);
  auto back = deserialize<ExecutionRecord>(text);
  CHECK(back == rec);
  CHECK(serialize(back) == text);
}

TEST_CASE("serialization round-trip is identity on generated records", "[types]") {
  std::mt19937_64 rng(20240811);
  for (int i = 0; i < 200; ++i) {
    ExecutionRecord rec;
    rec.record_id = "r" + std::to_string(i);
    rec.policy_id = "p" + std::to_string(rng() % 5);
    rec.representation = rep_from_vector(random_unit_vector(rng, 8));
    rec.representation.metadata.involved_objects = {"a", "b"};
    rec.representation.metadata.object_count = 2;
    rec.created_at_ms = static_cast<std::int64_t>(rng() % 1000000);
    bool ok = (rng() & 1) != 0;
    rec.report = ok ? success_report(uniform01(rng) * 100)
                    : failure_report(FailureStage::placement, 0.6, uniform01(rng) * 100);
    rec.report.metrics["x"] = uniform01(rng) * 2e-7 - 1e-7;
    rec.report.metrics["y"] = uniform01(rng) * 1e9;

    auto text = serialize(rec);
    auto back = deserialize<ExecutionRecord>(text);
    REQUIRE(back == rec);
    REQUIRE(serialize(back) == text);
  }
}

TEST_CASE("canonical emission of simple vectors", "[types]") {
  json j = std::vector<double>{1.0, 0.0, 0.0};
  std::string text = j.dump();
  CHECK(text == "[1.0,0.0,0.0]");
  auto back = json::parse(text).get<std::vector<double>>();
  CHECK(back == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("canonical objects sort their keys", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0}), "p", true);
  std::string text = serialize(rec);
  auto pos_created = text.find("\"created_at_ms\"");
  auto pos_policy = text.find("\"policy_id\"");
  auto pos_report = text.find("\"report\"");
  REQUIRE(pos_created != std::string::npos);
  REQUIRE(pos_policy != std::string::npos);
  CHECK(pos_created < pos_policy);
  CHECK(pos_policy < pos_report);
}

TEST_CASE("parse errors name the missing field", "[types]") {
  auto rec = make_record("r1", rep_from_vector({1, 0}), "p", true);
  json j = rec;
  j.erase("policy_id");
  try {
    deserialize<ExecutionRecord>(j.dump());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("policy_id") != std::string::npos);
  }
}

TEST_CASE("malformed text reports a byte offset", "[types]") {
  try {
    deserialize<ExecutionRecord>("{\"record_id\": \"r1\", ");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() > 0);
  }
}

TEST_CASE("policy descriptor invariants", "[types]") {
  PolicyDescriptor p{"dp3", PolicyKind::single_task, std::nullopt, ""};
  auto violations = validate(p);
  REQUIRE_FALSE(violations.empty());
  CHECK(violations[0].find("training_task_id") != std::string::npos);

  p.training_task_id = "lift_pot";
  CHECK(validate(p).empty());

  std::string text = serialize(p);
  CHECK(deserialize<PolicyDescriptor>(text) == p);
}
