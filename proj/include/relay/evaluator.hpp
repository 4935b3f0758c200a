#pragma once
// Evaluator: compresses an episode trace into a structured EvaluationReport.
// Keyframe sampling, registered metric tools, failure-stage classification
// and a deterministic summary template (the slot a VQA model drops into).
//
// Built-in tool kinds, loadable from a JSON manifest:
//   distance-threshold   min distance between two named objects + contact flag
//   region-containment   approach/placement of an object w.r.t. a goal object
//   pose-delta           net displacement of a named object
// Per-task timeouts come from the manifest as well.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "relay/types.hpp"
#include "relay/util.hpp"

namespace relay {

struct FrameSamplePlan {
  int m = 2;  // intermediate frames between the endpoints
};

// {0, T-1} plus m uniformly spaced interior indices (round half away from
// zero), duplicates collapsed.
inline std::vector<std::size_t> sample_frames(std::size_t frame_count, int m) {
  if (frame_count < 1) throw std::invalid_argument("sample_frames: frame_count >= 1");
  if (m < 0) throw std::invalid_argument("sample_frames: m >= 0");
  std::set<std::size_t> idx;
  idx.insert(0);
  idx.insert(frame_count - 1);
  for (int i = 1; i <= m; ++i) {
    double pos = static_cast<double>(i) * static_cast<double>(frame_count - 1) /
                 static_cast<double>(m + 1);
    idx.insert(static_cast<std::size_t>(std::llround(pos)));
  }
  return {idx.begin(), idx.end()};
}

using ToolBody = std::function<std::map<std::string, double>(const EpisodeTrace&)>;

struct ToolFn {
  std::string tool_id;
  std::string applies_to;  // glob over task_id
  ToolBody body;
};

struct ToolRegistry {
  std::vector<ToolFn> tools;
  // glob pattern -> timeout seconds; first match wins
  std::vector<std::pair<std::string, double>> timeouts;

  double timeout_for(const std::string& task_id) const {
    for (const auto& [pat, t] : timeouts)
      if (glob_match(pat, task_id)) return t;
    return 0.0;  // 0 = no timeout configured
  }
};

namespace tools {

inline double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Minimum distance between two named objects over the trace; contact = 1
// when it dips under the threshold.
inline ToolBody distance_threshold(std::string object_a, std::string object_b,
                                   double threshold) {
  return [=](const EpisodeTrace& trace) {
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& frame : trace.frames) {
      const SceneObject* a = frame.scene.find(object_a);
      const SceneObject* b = frame.scene.find(object_b);
      if (!a || !b) continue;
      dmin = std::min(dmin, dist3(a->position, b->position));
    }
    if (!std::isfinite(dmin))
      throw std::runtime_error("objects never co-present: " + object_a + ", " + object_b);
    return std::map<std::string, double>{{"min_distance", dmin},
                                         {"contact", dmin <= threshold ? 1.0 : 0.0}};
  };
}

// Approach + placement of `object` relative to `goal`: approached when the
// object ever comes within approach_radius, placed when the final frame is
// within radius.
inline ToolBody region_containment(std::string object, std::string goal, double radius,
                                   double approach_radius) {
  return [=](const EpisodeTrace& trace) {
    double dmin = std::numeric_limits<double>::infinity();
    double dlast = std::numeric_limits<double>::infinity();
    for (const auto& frame : trace.frames) {
      const SceneObject* o = frame.scene.find(object);
      const SceneObject* g = frame.scene.find(goal);
      if (!o || !g) continue;
      double d = dist3(o->position, g->position);
      dmin = std::min(dmin, d);
      dlast = d;
    }
    if (!std::isfinite(dmin))
      throw std::runtime_error("objects never co-present: " + object + ", " + goal);
    return std::map<std::string, double>{{"approached", dmin <= approach_radius ? 1.0 : 0.0},
                                         {"placed", dlast <= radius ? 1.0 : 0.0},
                                         {"final_offset", dlast}};
  };
}

inline ToolBody pose_delta(std::string object) {
  return [=](const EpisodeTrace& trace) {
    const SceneObject* first = nullptr;
    const SceneObject* last = nullptr;
    for (const auto& frame : trace.frames) {
      const SceneObject* o = frame.scene.find(object);
      if (!o) continue;
      if (!first) first = o;
      last = o;
    }
    if (!first) throw std::runtime_error("object never present: " + object);
    return std::map<std::string, double>{{"pose_delta", dist3(first->position, last->position)}};
  };
}

}  // namespace tools

// Manifest schema:
// {"tools":[{"tool_id":..,"applies_to":..,"kind":..,"params":{..}}],
//  "timeouts":[{"applies_to":..,"timeout_s":..}]}
inline ToolRegistry load_tool_manifest(const json& manifest) {
  ToolRegistry reg;
  for (const auto& t : manifest.value("tools", json::array())) {
    ToolFn fn;
    fn.tool_id = t.at("tool_id").get<std::string>();
    fn.applies_to = t.value("applies_to", "*");
    const std::string kind = t.at("kind").get<std::string>();
    const json params = t.value("params", json::object());
    if (kind == "distance-threshold") {
      fn.body = tools::distance_threshold(params.at("object_a").get<std::string>(),
                                          params.at("object_b").get<std::string>(),
                                          params.at("threshold").get<double>());
    } else if (kind == "region-containment") {
      fn.body = tools::region_containment(params.at("object").get<std::string>(),
                                          params.at("goal").get<std::string>(),
                                          params.at("radius").get<double>(),
                                          params.at("approach_radius").get<double>());
    } else if (kind == "pose-delta") {
      fn.body = tools::pose_delta(params.at("object").get<std::string>());
    } else {
      throw std::invalid_argument("unknown tool kind: " + kind);
    }
    reg.tools.push_back(std::move(fn));
  }
  for (const auto& t : manifest.value("timeouts", json::array()))
    reg.timeouts.emplace_back(t.value("applies_to", "*"), t.at("timeout_s").get<double>());
  return reg;
}

inline ToolRegistry load_tool_manifest_text(const std::string& text) {
  try {
    return load_tool_manifest(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
}

// Runs every matching tool; a tool that throws leaves an error marker and
// evaluation continues. Built-ins: elapsed_s, frame_count, timeout_s.
inline std::map<std::string, double> run_tools(const EpisodeTrace& trace,
                                               const ToolRegistry& registry,
                                               const std::string& task_id) {
  std::map<std::string, double> metrics;
  metrics["elapsed_s"] = trace.elapsed_s;
  metrics["frame_count"] = static_cast<double>(trace.frames.size());
  double timeout = registry.timeout_for(task_id);
  if (timeout > 0.0) metrics["timeout_s"] = timeout;

  for (const auto& tool : registry.tools) {
    if (!glob_match(tool.applies_to, task_id)) continue;
    std::map<std::string, double> result;
    try {
      result = tool.body(trace);
    } catch (const std::exception&) {
      metrics[tool.tool_id + ".error"] = 1.0;
      continue;
    }
    for (const auto& [key, value] : result) {
      if (metrics.count(key))
        metrics[tool.tool_id + "." + key] = value;  // collision: prefix by tool
      else
        metrics[key] = value;
    }
  }
  return metrics;
}

// Progress assigned per stage; the constants quantify how far the episode
// got and are deliberately coarse.
struct StageProgress {
  double placement = 0.6;
  double transport = 0.3;
  double timeout = 0.2;
  double grasp = 0.0;
};

struct StageResult {
  FailureStage stage = FailureStage::none;
  double progress = 1.0;
};

inline bool metric_true(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  return it != m.end() && it->second != 0.0;
}

// Rule order: grasp -> transport -> placement -> timeout. A failure that
// trips none of the predicates lands on placement (it died at the end).
inline StageResult classify_stage(const std::map<std::string, double>& metrics, bool outcome,
                                  const StageProgress& progress = {}) {
  if (outcome) return {FailureStage::none, 1.0};
  if (!metric_true(metrics, "contact")) return {FailureStage::grasp, progress.grasp};
  if (!metric_true(metrics, "approached")) return {FailureStage::transport, progress.transport};
  if (!metric_true(metrics, "placed")) return {FailureStage::placement, progress.placement};
  auto elapsed = metrics.find("elapsed_s");
  auto timeout = metrics.find("timeout_s");
  if (elapsed != metrics.end() && timeout != metrics.end() &&
      elapsed->second >= timeout->second)
    return {FailureStage::timeout, progress.timeout};
  return {FailureStage::placement, progress.placement};
}

namespace detail {

inline std::string fmt_metric(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

inline std::pair<std::string, double> top_violated_metric(
    const std::map<std::string, double>& metrics, FailureStage stage) {
  const char* key = "contact";
  switch (stage) {
    case FailureStage::grasp: key = "contact"; break;
    case FailureStage::transport: key = "approached"; break;
    case FailureStage::placement: key = "placed"; break;
    case FailureStage::timeout: key = "elapsed_s"; break;
    case FailureStage::none: break;
  }
  auto it = metrics.find(key);
  return {key, it == metrics.end() ? 0.0 : it->second};
}

}  // namespace detail

// Reference summary template. `sampled` is what a VQA backend would look at;
// the template only needs the instruction, metrics and stage.
inline std::string summarize(const TaskInstance& task, const std::vector<std::size_t>& sampled,
                             const std::map<std::string, double>& metrics, StageResult stage) {
  (void)sampled;
  char buf[320];
  if (stage.stage == FailureStage::none) {
    double elapsed = metrics.count("elapsed_s") ? metrics.at("elapsed_s") : 0.0;
    std::snprintf(buf, sizeof(buf), "Completed '%s' in %.1fs.", task.instruction.c_str(),
                  elapsed);
  } else {
    auto [key, value] = detail::top_violated_metric(metrics, stage.stage);
    std::snprintf(buf, sizeof(buf), "%s failure: %s=%s.", to_string(stage.stage).c_str(),
                  key.c_str(), detail::fmt_metric(value).c_str());
  }
  return buf;
}

// VQA contract: a model-backed summarizer drops in here (see backends.hpp).
class SummaryProvider {
 public:
  virtual ~SummaryProvider() = default;
  virtual std::string summarize(const TaskInstance& task,
                                const std::vector<std::size_t>& sampled_frames,
                                const std::map<std::string, double>& metrics,
                                StageResult stage) = 0;
};

struct EvaluateOptions {
  bool use_tools = true;    // "tools off" keeps built-ins only
  bool use_summary = true;  // "summary off" leaves summary empty
  StageProgress progress;
};

// Full evaluation: sample frames, run tools, classify, summarize. Report
// size is bounded regardless of trace length.
inline EvaluationReport evaluate(const TaskInstance& task, const EpisodeTrace& trace,
                                 const ToolRegistry& registry, const FrameSamplePlan& plan = {},
                                 const EvaluateOptions& options = {},
                                 SummaryProvider* vqa = nullptr) {
  auto violations = validate(trace);
  if (!violations.empty()) throw std::invalid_argument("evaluate: invalid trace: " + violations[0]);

  auto sampled = sample_frames(trace.frames.size(), plan.m);
  ToolRegistry empty;
  empty.timeouts = registry.timeouts;
  auto metrics = run_tools(trace, options.use_tools ? registry : empty, task.task_id);
  StageResult stage = classify_stage(metrics, trace.outcome, options.progress);

  EvaluationReport report;
  report.success = trace.outcome;
  report.elapsed_s = trace.elapsed_s;
  report.metrics = metrics;
  report.failure_stage = stage.stage;
  report.progress = stage.progress;
  if (options.use_summary)
    report.summary = vqa ? vqa->summarize(task, sampled, metrics, stage)
                         : summarize(task, sampled, metrics, stage);
  return report;
}

}  // namespace relay
