#pragma once
// Task representation z = g(observation, instruction): metadata extraction
// plus a deterministic feature-hashing embedder and the cosine kernel.
//
// The embedder concatenates three blocks and L2-normalizes the result:
//   [0, text_dims)                 signed hashed token counts of the
//                                  lowercased whitespace-split instruction
//   [text_dims, text+scene_dims)   per-object hashed slots holding absolute
//                                  position and camera-relative offset, with
//                                  the camera pose in fixed trailing coords
//   [text+scene, d)                signed hashed indicators of metadata
//                                  objects and tags
//
// A remote model can replace it behind EmbeddingProvider; indexes are never
// mixed across seeds because the store header pins (d, hash_seed).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "relay/types.hpp"
#include "relay/util.hpp"

namespace relay {

struct EmbedderConfig {
  int d = 256;
  int text_dims = 128;
  int scene_dims = 96;
  int meta_dims = 32;
  std::uint64_t hash_seed = 0x52454c4159ULL;
  // Ablation: keep only the instruction block (scene and metadata zeroed).
  bool text_only = false;

  void check() const {
    if (d <= 0 || text_dims <= 0 || scene_dims <= 0 || meta_dims <= 0)
      throw std::invalid_argument("embedder dims must be positive");
    if (text_dims + scene_dims + meta_dims != d)
      throw std::invalid_argument("text_dims + scene_dims + meta_dims must equal d");
    if (scene_dims < 16) throw std::invalid_argument("scene_dims too small (needs >= 16)");
  }

  bool operator==(const EmbedderConfig&) const = default;
};

inline void to_json(json& j, const EmbedderConfig& c) {
  j = json{{"d", c.d},
           {"text_dims", c.text_dims},
           {"scene_dims", c.scene_dims},
           {"meta_dims", c.meta_dims},
           {"hash_seed", c.hash_seed},
           {"text_only", c.text_only}};
}
inline void from_json(const json& j, EmbedderConfig& c) {
  c.d = j.value("d", 256);
  c.text_dims = j.value("text_dims", 128);
  c.scene_dims = j.value("scene_dims", 96);
  c.meta_dims = j.value("meta_dims", 32);
  c.hash_seed = j.value("hash_seed", static_cast<std::uint64_t>(0x52454c4159ULL));
  c.text_only = j.value("text_only", false);
}

inline TaskMetadata extract_metadata(const SceneFeatures& scene) {
  TaskMetadata meta;
  for (const auto& obj : scene.objects) {
    meta.involved_objects.insert(obj.name);
    if (!obj.category.empty()) meta.tags.insert(obj.category);
  }
  meta.object_count = meta.involved_objects.size();
  return meta;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  if (a.empty()) throw std::invalid_argument("cosine: empty vectors");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

namespace detail {

inline void hash_indicator(std::vector<double>& block, std::size_t offset, std::size_t dims,
                           const std::string& key, std::uint64_t seed, double weight = 1.0) {
  std::uint64_t h = hash64(key, seed);
  std::size_t idx = static_cast<std::size_t>(h % dims);
  double sign = (h >> 63) ? -1.0 : 1.0;
  block[offset + idx] += sign * weight;
}

}  // namespace detail

inline TaskRepresentation embed_task(const std::string& instruction, const SceneFeatures& scene,
                                     const TaskMetadata& meta, const EmbedderConfig& cfg) {
  cfg.check();
  if (instruction.empty()) throw std::invalid_argument("embed_task: empty instruction");

  std::vector<double> v(static_cast<std::size_t>(cfg.d), 0.0);
  const std::size_t text_off = 0;
  const std::size_t scene_off = static_cast<std::size_t>(cfg.text_dims);
  const std::size_t meta_off = scene_off + static_cast<std::size_t>(cfg.scene_dims);

  for (const auto& token : tokenize_lower(instruction))
    detail::hash_indicator(v, text_off, cfg.text_dims, "t:" + token, cfg.hash_seed);

  if (!cfg.text_only) {
    // Scene block: last 6 coords hold the camera pose, objects hash into
    // 6-wide slots in front of it.
    const std::size_t cam_off = static_cast<std::size_t>(cfg.scene_dims) - 6;
    const std::size_t slot_space = cam_off >= 6 ? cam_off - 5 : 1;
    for (const auto& obj : scene.objects) {
      std::uint64_t h = hash64("o:" + obj.name, cfg.hash_seed);
      std::size_t slot = static_cast<std::size_t>(h % slot_space);
      for (int i = 0; i < 3; ++i) {
        v[scene_off + slot + i] += obj.position[i];
        v[scene_off + slot + 3 + i] += obj.position[i] - scene.camera_pose[i];
      }
    }
    for (int i = 0; i < 6; ++i) v[scene_off + cam_off + i] += scene.camera_pose[i];

    for (const auto& name : meta.involved_objects)
      detail::hash_indicator(v, meta_off, cfg.meta_dims, "m:" + name, cfg.hash_seed);
    for (const auto& tag : meta.tags)
      detail::hash_indicator(v, meta_off, cfg.meta_dims, "g:" + tag, cfg.hash_seed);
  }

  double norm = l2_norm(v);
  if (norm == 0.0) throw std::domain_error("embed_task: degenerate input (zero vector)");
  for (double& x : v) x /= norm;

  TaskRepresentation rep;
  rep.vector = std::move(v);
  rep.metadata = meta;
  return rep;
}

inline TaskRepresentation embed_instance(const TaskInstance& task, const EmbedderConfig& cfg) {
  TaskMetadata meta = extract_metadata(task.scene);
  TaskRepresentation rep = embed_task(task.instruction, task.scene, meta, cfg);
  rep.source_task_id = task.task_id;
  return rep;
}

// Provider contract: anything that maps (instruction, scene, metadata) to a
// unit vector of dimension d. The feature-hashing embedder above is the
// reference; an HTTP-backed model provider lives in backends.hpp.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual TaskRepresentation embed(const std::string& instruction, const SceneFeatures& scene,
                                   const TaskMetadata& meta) = 0;
  virtual int dim() const = 0;
};

class HashingEmbedder : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(EmbedderConfig cfg) : cfg_(cfg) { cfg_.check(); }

  TaskRepresentation embed(const std::string& instruction, const SceneFeatures& scene,
                           const TaskMetadata& meta) override {
    return embed_task(instruction, scene, meta, cfg_);
  }
  int dim() const override { return cfg_.d; }
  const EmbedderConfig& config() const { return cfg_; }

 private:
  EmbedderConfig cfg_;
};

}  // namespace relay
