#pragma once
// Training-free policy onboarding: cluster the tasks the system has seen,
// evaluate the new policy on each cluster's representative (medoid) task a
// fixed number of trials, and register the results into store + context.
//
// k-means with k-means++ seeding, deterministic for a given seed. Empty
// clusters are re-seeded from the farthest point; medoids break ties on the
// lowest task_id.

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "relay/evaluator.hpp"
#include "relay/recorder.hpp"
#include "relay/types.hpp"
#include "relay/util.hpp"

namespace relay {

struct TaskPoint {
  std::string task_id;
  std::vector<double> vector;
};

struct ClusterAssignment {
  std::string cluster_id;
  std::vector<std::string> member_task_ids;
  std::vector<double> centroid;
  std::string medoid_task_id;
};

struct PlanEntry {
  std::string task_id;
  int n_trials = 0;
};

struct EvaluationPlan {
  std::string policy_id;
  std::vector<PlanEntry> entries;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace detail

inline std::vector<ClusterAssignment> cluster_tasks(const std::vector<TaskPoint>& points,
                                                    std::size_t k, std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("cluster_tasks: no points");
  if (k == 0 || k > points.size())
    throw std::invalid_argument("cluster_tasks: k must be in [1, |points|]");

  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);

  // k-means++ seeding
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[uniform_index(rng, n)].vector);
  std::vector<double> d2(n, 0.0);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, detail::sq_dist(points[i].vector, c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = uniform_index(rng, n);
    } else {
      double r = uniform01(rng) * total;
      pick = n - 1;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(points[pick].vector);
  }

  std::vector<std::size_t> assign(n, 0);
  const int max_iters = 100;
  const double tol = 1e-6;
  for (int iter = 0; iter < max_iters; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double d = detail::sq_dist(points[i].vector, centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assign[i] = arg;
    }

    std::vector<std::vector<double>> next(k,
                                          std::vector<double>(points[0].vector.size(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      counts[assign[i]] += 1;
      for (std::size_t dd = 0; dd < next[assign[i]].size(); ++dd)
        next[assign[i]][dd] += points[i].vector[dd];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed from the point farthest from its centroid.
        double far_d = -1.0;
        std::size_t far_i = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double d = detail::sq_dist(points[i].vector, centroids[assign[i]]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        next[c] = points[far_i].vector;
        counts[c] = 1;
        assign[far_i] = c;
      } else {
        for (double& x : next[c]) x /= static_cast<double>(counts[c]);
      }
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(detail::sq_dist(centroids[c], next[c])));
    centroids = std::move(next);
    if (shift < tol) break;
  }

  // Final assignment against converged centroids.
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      double d = detail::sq_dist(points[i].vector, centroids[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    assign[i] = arg;
  }

  std::vector<ClusterAssignment> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    out[c].cluster_id = "c" + zero_pad(c, 3);
    out[c].centroid = centroids[c];
  }
  for (std::size_t i = 0; i < n; ++i) out[assign[i]].member_task_ids.push_back(points[i].task_id);

  for (std::size_t c = 0; c < k; ++c) {
    double best = std::numeric_limits<double>::infinity();
    std::string medoid;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != c) continue;
      double d = detail::sq_dist(points[i].vector, centroids[c]);
      if (d < best || (d == best && points[i].task_id < medoid)) {
        best = d;
        medoid = points[i].task_id;
      }
    }
    out[c].medoid_task_id = medoid;
  }

  // Drop empty clusters (possible only if re-seeding raced convergence).
  std::erase_if(out, [](const ClusterAssignment& c) { return c.member_task_ids.empty(); });
  return out;
}

// Single-task policies are evaluated on their training task only; multi-task
// policies on one medoid per cluster. Default k = ceil(sqrt(#seen)).
inline EvaluationPlan evaluation_plan(const PolicyDescriptor& policy,
                                      const std::vector<TaskPoint>& seen_tasks,
                                      std::size_t k = 0, int n_trials = 10,
                                      std::uint64_t seed = 0) {
  if (n_trials < 1) throw std::invalid_argument("evaluation_plan: n_trials >= 1");
  if (seen_tasks.empty()) throw std::invalid_argument("evaluation_plan: no seen tasks");

  EvaluationPlan plan;
  plan.policy_id = policy.policy_id;

  if (policy.kind == PolicyKind::single_task) {
    if (!policy.training_task_id)
      throw std::invalid_argument("single_task policy without training_task_id");
    bool known = false;
    for (const auto& t : seen_tasks) known = known || t.task_id == *policy.training_task_id;
    if (!known)
      throw std::invalid_argument("unknown training task: " + *policy.training_task_id);
    plan.entries.push_back(PlanEntry{*policy.training_task_id, n_trials});
    return plan;
  }

  if (k == 0)
    k = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(seen_tasks.size()))));
  k = std::min(k, seen_tasks.size());
  for (const auto& cluster : cluster_tasks(seen_tasks, k, seed))
    plan.entries.push_back(PlanEntry{cluster.medoid_task_id, n_trials});
  return plan;
}

// One executed onboarding trial: the task instance that was run and the
// trace the policy produced on it.
struct OnboardingResult {
  TaskInstance task;
  EpisodeTrace trace;
};

// Evaluates every executed trial, writes records + context updates, and
// appends the policy to the pool.
inline std::vector<PolicyDescriptor> register_policy(
    const PolicyDescriptor& policy, const std::vector<OnboardingResult>& results,
    const ToolRegistry& registry, const EmbedderConfig& embedder, RecordStore& store,
    RouterContext& ctx, std::vector<PolicyDescriptor> pool,
    const std::vector<ClusterRef>& clusters = {}, const RecorderConfig& recorder_cfg = {},
    const FrameSamplePlan& plan = {}, Clock clock = {}) {
  for (const auto& p : pool)
    if (p.policy_id == policy.policy_id)
      throw std::invalid_argument("duplicate policy_id: " + policy.policy_id);
  if (results.empty())
    throw std::invalid_argument("register_policy: evaluation plan was not executed");
  if (!clock) clock = system_clock_ms();

  for (const auto& r : results) {
    EvaluationReport report = evaluate(r.task, r.trace, registry, plan);
    TaskRepresentation repr = embed_instance(r.task, embedder);
    std::int64_t now = clock();
    RoutingDecision pseudo;
    pseudo.chosen_policy = policy.policy_id;
    write_back(repr, pseudo, report, store, now);
    update_context(ctx, repr, policy.policy_id, report, clusters, recorder_cfg, now);
  }
  pool.push_back(policy);
  return pool;
}

}  // namespace relay
