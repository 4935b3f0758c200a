#pragma once
// Deterministic reference reranker: reorders retrieved records so the most
// task-relevant lead the router's input. Scores every candidate in one
// batch pass (the contract a logit-based model scorer drops into).

#include <algorithm>
#include <set>
#include <vector>

#include "relay/store.hpp"
#include "relay/types.hpp"

namespace relay {

struct RerankConfig {
  // Metadata overlap nudges, geometry dominates.
  double beta = 0.1;
};

struct RerankScore {
  std::string record_id;
  double score = 0.0;
};

struct RerankedHit {
  RetrievalHit hit;
  RerankScore score;
};

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// score = clamp01(sim_norm + beta * Jaccard(query objects, record objects)),
// sim_norm = (similarity + 1) / 2. One batch call per candidate list.
inline std::vector<RerankScore> score_candidates(const TaskRepresentation& query,
                                                 const std::vector<RetrievalHit>& hits,
                                                 const RerankConfig& cfg = {}) {
  if (hits.empty()) throw std::invalid_argument("score_candidates: empty candidate list");
  std::vector<RerankScore> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    double sim_norm = (h.similarity + 1.0) / 2.0;
    double j = jaccard(query.metadata.involved_objects,
                       h.record.representation.metadata.involved_objects);
    double s = std::clamp(sim_norm + cfg.beta * j, 0.0, 1.0);
    out.push_back(RerankScore{h.record.record_id, s});
  }
  return out;
}

// Stable sort by score descending; ties keep original retrieval order.
inline std::vector<RerankedHit> rerank_scored(const TaskRepresentation& query,
                                              const std::vector<RetrievalHit>& hits,
                                              const RerankConfig& cfg = {}) {
  if (hits.empty()) return {};
  auto scores = score_candidates(query, hits, cfg);
  std::vector<RerankedHit> out;
  out.reserve(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) out.push_back(RerankedHit{hits[i], scores[i]});
  std::stable_sort(out.begin(), out.end(), [](const RerankedHit& a, const RerankedHit& b) {
    return a.score.score > b.score.score;
  });
  return out;
}

inline std::vector<RetrievalHit> rerank(const TaskRepresentation& query,
                                        const std::vector<RetrievalHit>& hits,
                                        const RerankConfig& cfg = {}) {
  std::vector<RetrievalHit> out;
  for (auto& rh : rerank_scored(query, hits, cfg)) out.push_back(std::move(rh.hit));
  return out;
}

// Contract for a model-backed scorer: one request per batch, one score per
// candidate, order aligned with the input.
class RerankProvider {
 public:
  virtual ~RerankProvider() = default;
  virtual std::vector<RerankScore> score(const TaskRepresentation& query,
                                         const std::vector<RetrievalHit>& hits) = 0;
};

class ReferenceReranker : public RerankProvider {
 public:
  explicit ReferenceReranker(RerankConfig cfg = {}) : cfg_(cfg) {}
  std::vector<RerankScore> score(const TaskRepresentation& query,
                                 const std::vector<RetrievalHit>& hits) override {
    return score_candidates(query, hits, cfg_);
  }

 private:
  RerankConfig cfg_;
};

}  // namespace relay
