#pragma once
// Shared test fixtures and generators.

#include <random>
#include <string>
#include <vector>

#include "relay/embedding.hpp"
#include "relay/store.hpp"
#include "relay/types.hpp"
#include "relay/util.hpp"

namespace relay::test {

inline SceneFeatures make_scene(std::initializer_list<std::pair<std::string, std::string>> objs,
                                std::array<double, 6> camera = {0, -0.8, 0.6, 0.9, 0, 0}) {
  SceneFeatures scene;
  double x = 0.1;
  for (const auto& [name, category] : objs) {
    scene.objects.push_back(SceneObject{name, {x, 0.2, 0.02}, category});
    x += 0.15;
  }
  scene.camera_pose = camera;
  return scene;
}

inline TaskInstance make_task(const std::string& task_id, const std::string& instruction,
                              SceneFeatures scene, std::int64_t ts = 1000) {
  return TaskInstance{task_id, instruction, std::move(scene), ts};
}

inline EvaluationReport success_report(double elapsed = 10.0) {
  EvaluationReport r;
  r.success = true;
  r.elapsed_s = elapsed;
  r.failure_stage = FailureStage::none;
  r.progress = 1.0;
  r.summary = "ok";
  return r;
}

inline EvaluationReport failure_report(FailureStage stage, double progress,
                                       double elapsed = 12.0) {
  EvaluationReport r;
  r.success = false;
  r.elapsed_s = elapsed;
  r.failure_stage = stage;
  r.progress = progress;
  r.summary = "failed";
  return r;
}

// Unit vector with a given cosine against the first basis axis, embedded in
// dimension `dim` using axes 0 and 1.
inline std::vector<double> vector_with_cosine(double target, std::size_t dim = 4) {
  std::vector<double> v(dim, 0.0);
  v[0] = target;
  v[1] = std::sqrt(std::max(0.0, 1.0 - target * target));
  return v;
}

inline TaskRepresentation rep_from_vector(std::vector<double> v,
                                          const std::string& source = "t") {
  TaskRepresentation r;
  double n = l2_norm(v);
  for (auto& x : v) x /= n;
  r.vector = std::move(v);
  r.metadata.object_count = 0;
  r.source_task_id = source;
  return r;
}

inline ExecutionRecord make_record(const std::string& id, TaskRepresentation rep,
                                   const std::string& policy, bool success,
                                   std::int64_t created = 0) {
  ExecutionRecord rec;
  rec.record_id = id;
  rec.representation = std::move(rep);
  rec.policy_id = policy;
  rec.report = success ? success_report() : failure_report(FailureStage::grasp, 0.0);
  rec.created_at_ms = created;
  return rec;
}

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      // Box-Muller-ish symmetric draw; exact distribution is irrelevant.
      x = uniform01(rng) * 2.0 - 1.0;
      n2 += x * x;
    }
  } while (n2 == 0.0);
  double n = std::sqrt(n2);
  for (auto& x : v) x /= n;
  return v;
}

}  // namespace relay::test
