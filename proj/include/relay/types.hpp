#pragma once
// Core domain types shared by every module: task instances and scenes,
// task representations, policy descriptors, execution records, evaluation
// reports and routing decisions. All of them are immutable values with
// canonical JSON serialization (sorted keys, round-trip exact numbers) so
// stores and logs diff cleanly.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "relay/util.hpp"

namespace relay {

using json = nlohmann::json;

// Thrown when canonical text cannot be parsed back into a domain value.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

enum class PolicyKind { single_task, multi_task };
enum class FailureStage { none, grasp, transport, placement, timeout };

NLOHMANN_JSON_SERIALIZE_ENUM(PolicyKind, {
                                             {PolicyKind::single_task, "single_task"},
                                             {PolicyKind::multi_task, "multi_task"},
                                         })

NLOHMANN_JSON_SERIALIZE_ENUM(FailureStage, {
                                               {FailureStage::none, "none"},
                                               {FailureStage::grasp, "grasp"},
                                               {FailureStage::transport, "transport"},
                                               {FailureStage::placement, "placement"},
                                               {FailureStage::timeout, "timeout"},
                                           })

inline std::string to_string(FailureStage s) {
  switch (s) {
    case FailureStage::none: return "none";
    case FailureStage::grasp: return "grasp";
    case FailureStage::transport: return "transport";
    case FailureStage::placement: return "placement";
    case FailureStage::timeout: return "timeout";
  }
  return "none";
}

struct SceneObject {
  std::string name;
  std::array<double, 3> position{};
  std::string category;

  bool operator==(const SceneObject&) const = default;
};

struct SceneFeatures {
  std::vector<SceneObject> objects;
  // Position (meters) then orientation (radians).
  std::array<double, 6> camera_pose{};
  std::map<std::string, double> extra;

  bool operator==(const SceneFeatures&) const = default;

  const SceneObject* find(const std::string& name) const {
    for (const auto& o : objects)
      if (o.name == name) return &o;
    return nullptr;
  }
};

struct TaskInstance {
  std::string task_id;
  std::string instruction;
  SceneFeatures scene;
  std::int64_t timestamp_ms = 0;

  bool operator==(const TaskInstance&) const = default;
};

struct TaskMetadata {
  std::set<std::string> involved_objects;
  std::uint64_t object_count = 0;
  std::set<std::string> tags;

  bool operator==(const TaskMetadata&) const = default;
};

struct TaskRepresentation {
  std::vector<double> vector;
  TaskMetadata metadata;
  std::string source_task_id;

  bool operator==(const TaskRepresentation&) const = default;
};

struct PolicyDescriptor {
  std::string policy_id;
  PolicyKind kind = PolicyKind::multi_task;
  std::optional<std::string> training_task_id;
  std::string endpoint;

  bool operator==(const PolicyDescriptor&) const = default;
};

struct EvaluationReport {
  bool success = false;
  double elapsed_s = 0.0;
  std::map<std::string, double> metrics;
  FailureStage failure_stage = FailureStage::none;
  double progress = 0.0;
  std::string summary;

  bool operator==(const EvaluationReport&) const = default;
};

struct ExecutionRecord {
  std::string record_id;
  TaskRepresentation representation;
  std::string policy_id;
  EvaluationReport report;
  std::int64_t created_at_ms = 0;

  bool operator==(const ExecutionRecord&) const = default;
};

struct RoutingDecision {
  std::string chosen_policy;
  std::map<std::string, double> scores;
  std::vector<std::string> evidence;
  double routing_latency_ms = 0.0;
  bool fallback = false;

  bool operator==(const RoutingDecision&) const = default;
};

struct TraceFrame {
  double t_s = 0.0;
  SceneFeatures scene;

  bool operator==(const TraceFrame&) const = default;
};

// Action effects are abstracted to scene snapshots plus gripper state;
// raw policy actions are not modeled.
struct EpisodeTrace {
  std::vector<TraceFrame> frames;
  std::vector<bool> gripper_states;
  bool outcome = false;
  double elapsed_s = 0.0;

  bool operator==(const EpisodeTrace&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

inline bool finite(double v) { return std::isfinite(v); }

inline void validate_scene(const SceneFeatures& scene, std::vector<std::string>& out) {
  std::set<std::string> names;
  for (const auto& o : scene.objects) {
    if (!names.insert(o.name).second)
      out.push_back("scene object names unique: duplicate '" + o.name + "'");
    for (double p : o.position)
      if (!finite(p)) {
        out.push_back("scene positions finite");
        break;
      }
  }
  for (double c : scene.camera_pose)
    if (!finite(c)) {
      out.push_back("camera pose finite");
      break;
    }
}

inline void validate_metadata(const TaskMetadata& m, std::vector<std::string>& out) {
  if (m.object_count != m.involved_objects.size())
    out.push_back("object_count == |involved_objects|");
}

// unit-norm check tolerance for stored representations
inline constexpr double kUnitNormTol = 1e-9;

inline void validate_representation(const TaskRepresentation& r, std::vector<std::string>& out,
                                    std::size_t expected_dim = 0) {
  if (r.vector.empty()) {
    out.push_back("representation vector non-empty");
  } else {
    double n = l2_norm(r.vector);
    if (!finite(n) || std::abs(n - 1.0) > kUnitNormTol) out.push_back("unit norm");
  }
  if (expected_dim != 0 && r.vector.size() != expected_dim)
    out.push_back("representation dimension matches configured d");
  validate_metadata(r.metadata, out);
}

inline void validate_report(const EvaluationReport& rep, std::vector<std::string>& out) {
  if (rep.success && rep.failure_stage != FailureStage::none)
    out.push_back("success implies failure_stage none");
  if (rep.success && rep.progress != 1.0) out.push_back("success implies progress 1");
  if (rep.failure_stage == FailureStage::grasp && rep.progress != 0.0)
    out.push_back("grasp stage implies progress 0");
  if (!(rep.elapsed_s >= 0.0)) out.push_back("elapsed_s nonnegative");
  if (!(rep.progress >= 0.0 && rep.progress <= 1.0)) out.push_back("progress in [0,1]");
  for (const auto& [k, v] : rep.metrics)
    if (!finite(v)) {
      out.push_back("metrics finite: " + k);
      break;
    }
}

// Returns every violated invariant; empty means the record is valid.
inline std::vector<std::string> validate(const ExecutionRecord& rec,
                                         std::size_t expected_dim = 0) {
  std::vector<std::string> out;
  if (rec.record_id.empty()) out.push_back("record_id non-empty");
  if (rec.policy_id.empty()) out.push_back("policy_id non-empty");
  validate_representation(rec.representation, out, expected_dim);
  validate_report(rec.report, out);
  return out;
}

inline std::vector<std::string> validate(const TaskInstance& t) {
  std::vector<std::string> out;
  if (t.task_id.empty()) out.push_back("task_id non-empty");
  if (t.instruction.empty()) out.push_back("instruction non-empty");
  validate_scene(t.scene, out);
  return out;
}

inline std::vector<std::string> validate(const EpisodeTrace& tr) {
  std::vector<std::string> out;
  if (tr.frames.empty()) {
    out.push_back("at least one frame");
    return out;
  }
  for (std::size_t i = 1; i < tr.frames.size(); ++i)
    if (!(tr.frames[i].t_s > tr.frames[i - 1].t_s)) {
      out.push_back("timestamps strictly increasing");
      break;
    }
  double span = tr.frames.back().t_s - tr.frames.front().t_s;
  if (std::abs(span - tr.elapsed_s) > 1e-9)
    out.push_back("elapsed_s equals last minus first timestamp");
  return out;
}

inline std::vector<std::string> validate(const PolicyDescriptor& p) {
  std::vector<std::string> out;
  if (p.policy_id.empty()) out.push_back("policy_id non-empty");
  if (p.kind == PolicyKind::single_task && !p.training_task_id.has_value())
    out.push_back("single_task requires training_task_id");
  return out;
}

// ---------------------------------------------------------------------------
// JSON serialization. Required fields are read with at() so missing keys
// surface as parse errors naming the field.

inline void to_json(json& j, const SceneObject& o) {
  j = json{{"name", o.name}, {"position", o.position}, {"category", o.category}};
}
inline void from_json(const json& j, SceneObject& o) {
  j.at("name").get_to(o.name);
  j.at("position").get_to(o.position);
  j.at("category").get_to(o.category);
}

inline void to_json(json& j, const SceneFeatures& s) {
  j = json{{"objects", s.objects}, {"camera_pose", s.camera_pose}, {"extra", s.extra}};
}
inline void from_json(const json& j, SceneFeatures& s) {
  j.at("objects").get_to(s.objects);
  j.at("camera_pose").get_to(s.camera_pose);
  s.extra = j.value("extra", std::map<std::string, double>{});
}

inline void to_json(json& j, const TaskInstance& t) {
  j = json{{"task_id", t.task_id},
           {"instruction", t.instruction},
           {"scene", t.scene},
           {"timestamp_ms", t.timestamp_ms}};
}
inline void from_json(const json& j, TaskInstance& t) {
  j.at("task_id").get_to(t.task_id);
  j.at("instruction").get_to(t.instruction);
  j.at("scene").get_to(t.scene);
  j.at("timestamp_ms").get_to(t.timestamp_ms);
}

inline void to_json(json& j, const TaskMetadata& m) {
  j = json{{"involved_objects", m.involved_objects},
           {"object_count", m.object_count},
           {"tags", m.tags}};
}
inline void from_json(const json& j, TaskMetadata& m) {
  j.at("involved_objects").get_to(m.involved_objects);
  j.at("object_count").get_to(m.object_count);
  j.at("tags").get_to(m.tags);
}

inline void to_json(json& j, const TaskRepresentation& r) {
  j = json{{"vector", r.vector},
           {"metadata", r.metadata},
           {"source_task_id", r.source_task_id}};
}
inline void from_json(const json& j, TaskRepresentation& r) {
  j.at("vector").get_to(r.vector);
  j.at("metadata").get_to(r.metadata);
  j.at("source_task_id").get_to(r.source_task_id);
}

inline void to_json(json& j, const PolicyDescriptor& p) {
  j = json{{"policy_id", p.policy_id}, {"kind", p.kind}, {"endpoint", p.endpoint}};
  if (p.training_task_id) j["training_task_id"] = *p.training_task_id;
}
inline void from_json(const json& j, PolicyDescriptor& p) {
  j.at("policy_id").get_to(p.policy_id);
  j.at("kind").get_to(p.kind);
  p.endpoint = j.value("endpoint", std::string{});
  if (j.contains("training_task_id"))
    p.training_task_id = j.at("training_task_id").get<std::string>();
  else
    p.training_task_id.reset();
}

inline void to_json(json& j, const EvaluationReport& r) {
  j = json{{"success", r.success},       {"elapsed_s", r.elapsed_s},
           {"metrics", r.metrics},       {"failure_stage", r.failure_stage},
           {"progress", r.progress},     {"summary", r.summary}};
}
inline void from_json(const json& j, EvaluationReport& r) {
  j.at("success").get_to(r.success);
  j.at("elapsed_s").get_to(r.elapsed_s);
  j.at("metrics").get_to(r.metrics);
  j.at("failure_stage").get_to(r.failure_stage);
  j.at("progress").get_to(r.progress);
  r.summary = j.value("summary", std::string{});
}

inline void to_json(json& j, const ExecutionRecord& r) {
  j = json{{"record_id", r.record_id},
           {"representation", r.representation},
           {"policy_id", r.policy_id},
           {"report", r.report},
           {"created_at_ms", r.created_at_ms}};
}
inline void from_json(const json& j, ExecutionRecord& r) {
  j.at("record_id").get_to(r.record_id);
  j.at("representation").get_to(r.representation);
  j.at("policy_id").get_to(r.policy_id);
  j.at("report").get_to(r.report);
  j.at("created_at_ms").get_to(r.created_at_ms);
}

inline void to_json(json& j, const RoutingDecision& d) {
  j = json{{"chosen_policy", d.chosen_policy},
           {"scores", d.scores},
           {"evidence", d.evidence},
           {"routing_latency_ms", d.routing_latency_ms},
           {"fallback", d.fallback}};
}
inline void from_json(const json& j, RoutingDecision& d) {
  j.at("chosen_policy").get_to(d.chosen_policy);
  j.at("scores").get_to(d.scores);
  j.at("evidence").get_to(d.evidence);
  d.routing_latency_ms = j.value("routing_latency_ms", 0.0);
  d.fallback = j.value("fallback", false);
}

inline void to_json(json& j, const TraceFrame& f) {
  j = json{{"t_s", f.t_s}, {"scene", f.scene}};
}
inline void from_json(const json& j, TraceFrame& f) {
  j.at("t_s").get_to(f.t_s);
  j.at("scene").get_to(f.scene);
}

inline void to_json(json& j, const EpisodeTrace& t) {
  j = json{{"frames", t.frames},
           {"gripper_states", t.gripper_states},
           {"outcome", t.outcome},
           {"elapsed_s", t.elapsed_s}};
}
inline void from_json(const json& j, EpisodeTrace& t) {
  j.at("frames").get_to(t.frames);
  j.at("gripper_states").get_to(t.gripper_states);
  j.at("outcome").get_to(t.outcome);
  j.at("elapsed_s").get_to(t.elapsed_s);
}

// Canonical text: compact, keys sorted (json uses an ordered map), numbers
// emitted with round-trip-exact precision.
template <typename T>
std::string serialize(const T& value) {
  json j = value;
  return j.dump();
}

template <typename T>
T deserialize(const std::string& text) {
  try {
    return json::parse(text).get<T>();
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  } catch (const json::exception& e) {
    throw ParseError(e.what(), 0);
  }
}

}  // namespace relay
