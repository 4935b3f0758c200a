#pragma once
// Router: estimates a success score for every pooled policy from reranked
// retrieval evidence plus router-context priors, and picks the argmax.
//
// Reference estimator (training-free, no exploration bonuses):
//   S_pi = (sum_i w_i * s_i + alpha * prior_pi) / (sum_i w_i + alpha)
// where i ranges over retrieved records of pi, w_i is the rerank score,
// s_i the success flag, and prior_pi the mean progress of pi's context
// items in the query's nearest cluster. Progress (not raw success) feeds
// the prior: policies that die early carry less credit than ones that fail
// at the last step. An LLM-backed router can replace this behind
// RouterBackend (see backends.hpp).

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "relay/embedding.hpp"
#include "relay/recorder.hpp"
#include "relay/rerank.hpp"
#include "relay/store.hpp"
#include "relay/types.hpp"

namespace relay {

struct RouterParams {
  std::size_t k = 16;          // retrieval depth
  double alpha = 2.0;          // prior pseudo-weight
  double default_prior = 0.5;  // score for policies with no evidence at all
  // Ablation: prior from raw success counting instead of mean progress.
  bool stage_aware_prior = true;
  std::string tie_break = "records_then_id";

  void check() const {
    if (k < 1) throw std::invalid_argument("router k must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("router alpha must be >= 0");
    if (default_prior < 0.0 || default_prior > 1.0)
      throw std::invalid_argument("default_prior must be in [0,1]");
  }
};

inline void to_json(json& j, const RouterParams& p) {
  j = json{{"k", p.k},
           {"alpha", p.alpha},
           {"default_prior", p.default_prior},
           {"stage_aware_prior", p.stage_aware_prior},
           {"tie_break", p.tie_break}};
}
inline void from_json(const json& j, RouterParams& p) {
  p.k = j.value("k", static_cast<std::size_t>(16));
  p.alpha = j.value("alpha", 2.0);
  p.default_prior = j.value("default_prior", 0.5);
  p.stage_aware_prior = j.value("stage_aware_prior", true);
  p.tie_break = j.value("tie_break", std::string("records_then_id"));
}

namespace detail {

// Cluster whose items sit nearest the query (max centroid cosine over all
// items; ties keep the smaller item_id).
inline std::string nearest_cluster(const RouterContext& ctx, const TaskRepresentation& query) {
  std::string cluster;
  double best = -2.0;
  for (const auto& item : ctx.items) {
    if (item.centroid.size() != query.vector.size()) continue;
    double sim = cosine(item.centroid, query.vector);
    if (sim > best) {
      best = sim;
      cluster = item.cluster_id;
    }
  }
  return cluster;
}

inline double context_prior(const RouterContext& ctx, const std::string& cluster,
                            const std::string& policy_id, const RouterParams& params) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& item : ctx.items) {
    if (item.policy_id != policy_id || item.cluster_id != cluster) continue;
    if (item.trials == 0) continue;
    sum += params.stage_aware_prior
               ? item.mean_progress
               : static_cast<double>(item.successes) / static_cast<double>(item.trials);
    n += 1;
  }
  if (n == 0) return params.default_prior;
  return sum / static_cast<double>(n);
}

}  // namespace detail

inline std::map<std::string, double> estimate_scores(
    const TaskRepresentation& query, const std::vector<RerankedHit>& reranked,
    const RouterContext& context, const std::vector<PolicyDescriptor>& pool,
    const RouterParams& params) {
  if (pool.empty()) throw std::invalid_argument("estimate_scores: empty pool");
  params.check();

  const std::string cluster = detail::nearest_cluster(context, query);

  std::map<std::string, double> weighted_success;
  std::map<std::string, double> weight_sum;
  for (const auto& rh : reranked) {
    const std::string& pid = rh.hit.record.policy_id;
    double w = rh.score.score;
    weighted_success[pid] += w * (rh.hit.record.report.success ? 1.0 : 0.0);
    weight_sum[pid] += w;
  }

  std::map<std::string, double> scores;
  for (const auto& policy : pool) {
    double prior = detail::context_prior(context, cluster, policy.policy_id, params);
    double num = weighted_success.count(policy.policy_id) ? weighted_success[policy.policy_id] : 0.0;
    double den = weight_sum.count(policy.policy_id) ? weight_sum[policy.policy_id] : 0.0;
    double s;
    if (den + params.alpha > 0.0)
      s = (num + params.alpha * prior) / (den + params.alpha);
    else
      s = prior;  // alpha == 0 and no evidence: fall back to the prior
    scores[policy.policy_id] = std::clamp(s, 0.0, 1.0);
  }
  return scores;
}

// Argmax over scores; ties go to the policy with more supporting retrieved
// records, then to the lexicographically smaller policy_id.
inline RoutingDecision select_policy(const std::map<std::string, double>& scores,
                                     const std::vector<RerankedHit>& reranked) {
  if (scores.empty()) throw std::invalid_argument("select_policy: empty score map");

  std::map<std::string, std::size_t> support;
  for (const auto& rh : reranked) support[rh.hit.record.policy_id] += 1;

  std::string best;
  double best_score = -1.0;
  std::size_t best_support = 0;
  for (const auto& [pid, score] : scores) {  // map order: ids ascending
    std::size_t sup = support.count(pid) ? support[pid] : 0;
    if (best.empty() || score > best_score ||
        (score == best_score && sup > best_support)) {
      best = pid;
      best_score = score;
      best_support = sup;
    }
  }

  RoutingDecision d;
  d.chosen_policy = best;
  d.scores = scores;
  for (const auto& rh : reranked) d.evidence.push_back(rh.hit.record.record_id);
  return d;
}

// Full deterministic pipeline: extract metadata, embed, retrieve, rerank,
// estimate, select. Latency covers this pipeline only; policy execution is
// the caller's job. StoreT is RecordStore or StoreSnapshot.
template <typename StoreT>
RoutingDecision route(const TaskInstance& task, const StoreT& store,
                      const RouterContext& context,
                      const std::vector<PolicyDescriptor>& pool,
                      const RouterParams& params, const EmbedderConfig& embedder,
                      const RerankConfig& reranker = {}) {
  if (pool.empty()) throw std::invalid_argument("route: empty pool");
  auto t0 = std::chrono::steady_clock::now();

  TaskRepresentation repr = embed_instance(task, embedder);
  std::vector<RetrievalHit> hits = store.top_k(repr, params.k);
  std::vector<RerankedHit> reranked =
      hits.empty() ? std::vector<RerankedHit>{} : rerank_scored(repr, hits, reranker);
  auto scores = estimate_scores(repr, reranked, context, pool, params);
  RoutingDecision decision = select_policy(scores, reranked);
  decision.fallback = hits.empty();

  auto t1 = std::chrono::steady_clock::now();
  decision.routing_latency_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return decision;
}

}  // namespace relay
