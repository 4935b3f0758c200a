#pragma once
// Recorder: writes evaluation outcomes back to the store and maintains the
// router context as itemized per-policy / per-cluster performance memory.
// Updates are incremental (touch one item + the version counter); duplicate
// items merge by centroid similarity instead of full context rewrites.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "relay/embedding.hpp"
#include "relay/store.hpp"
#include "relay/types.hpp"

namespace relay {

struct RouterContextItem {
  std::string item_id;
  std::string policy_id;
  std::string cluster_id;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double mean_progress = 0.0;
  std::string note;
  std::vector<double> centroid;
  std::int64_t updated_at_ms = 0;

  bool operator==(const RouterContextItem&) const = default;
};

struct RouterContext {
  std::vector<RouterContextItem> items;
  std::uint64_t version = 0;
  std::uint64_t next_item_seq = 1;

  bool operator==(const RouterContext&) const = default;
};

inline void to_json(json& j, const RouterContextItem& it) {
  j = json{{"item_id", it.item_id},
           {"policy_id", it.policy_id},
           {"cluster_id", it.cluster_id},
           {"trials", it.trials},
           {"successes", it.successes},
           {"mean_progress", it.mean_progress},
           {"note", it.note},
           {"centroid", it.centroid},
           {"updated_at_ms", it.updated_at_ms}};
}
inline void from_json(const json& j, RouterContextItem& it) {
  j.at("item_id").get_to(it.item_id);
  j.at("policy_id").get_to(it.policy_id);
  j.at("cluster_id").get_to(it.cluster_id);
  j.at("trials").get_to(it.trials);
  j.at("successes").get_to(it.successes);
  j.at("mean_progress").get_to(it.mean_progress);
  it.note = j.value("note", std::string{});
  j.at("centroid").get_to(it.centroid);
  it.updated_at_ms = j.value("updated_at_ms", static_cast<std::int64_t>(0));
}

inline void to_json(json& j, const RouterContext& c) {
  j = json{{"items", c.items}, {"version", c.version}, {"next_item_seq", c.next_item_seq}};
}
inline void from_json(const json& j, RouterContext& c) {
  j.at("items").get_to(c.items);
  j.at("version").get_to(c.version);
  c.next_item_seq = j.value("next_item_seq", static_cast<std::uint64_t>(c.items.size() + 1));
}

inline std::vector<std::string> validate(const RouterContextItem& it) {
  std::vector<std::string> out;
  if (it.successes > it.trials) out.push_back("successes <= trials");
  if (!(it.mean_progress >= 0.0 && it.mean_progress <= 1.0))
    out.push_back("mean_progress in [0,1]");
  if (!it.centroid.empty()) {
    double n = l2_norm(it.centroid);
    if (std::abs(n - 1.0) > 1e-6) out.push_back("centroid unit norm");
  }
  return out;
}

struct RecorderConfig {
  double tau_match = 0.90;   // in-place update threshold
  double tau_dup = 0.92;     // duplicate-merge threshold
  int dedup_every = 50;      // run merge_duplicates after this many updates
  std::size_t note_cap = 160;
};

inline void to_json(json& j, const RecorderConfig& c) {
  j = json{{"tau_match", c.tau_match},
           {"tau_dup", c.tau_dup},
           {"dedup_every", c.dedup_every}};
}
inline void from_json(const json& j, RecorderConfig& c) {
  c.tau_match = j.value("tau_match", 0.90);
  c.tau_dup = j.value("tau_dup", 0.92);
  c.dedup_every = j.value("dedup_every", 50);
}

// Known clusters (from onboarding) used to label fresh context items.
struct ClusterRef {
  std::string cluster_id;
  std::vector<double> centroid;
};

namespace detail {

inline std::vector<double> weighted_unit_mean(const std::vector<double>& a, double wa,
                                              const std::vector<double>& b, double wb) {
  std::vector<double> m(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = wa * a[i] + wb * b[i];
  double n = l2_norm(m);
  if (n == 0.0) return a;  // antipodal degenerate case: keep the old centroid
  for (double& x : m) x /= n;
  return m;
}

inline std::string clip_note(const std::string& s, std::size_t cap) {
  if (s.size() <= cap) return s;
  return s.substr(0, cap);
}

}  // namespace detail

// Appends a new item or updates the best-matching one (same policy, centroid
// cosine >= tau_match). Touches at most one item plus the version counter.
inline void update_context(RouterContext& ctx, const TaskRepresentation& repr,
                           const std::string& policy_id, const EvaluationReport& report,
                           const std::vector<ClusterRef>& clusters = {},
                           const RecorderConfig& cfg = {}, std::int64_t now_ms = 0) {
  RouterContextItem* best = nullptr;
  double best_sim = 0.0;
  for (auto& item : ctx.items) {
    if (item.policy_id != policy_id) continue;
    double sim = cosine(item.centroid, repr.vector);
    if (sim >= cfg.tau_match && (best == nullptr || sim > best_sim)) {
      best = &item;
      best_sim = sim;
    }
  }

  if (best != nullptr) {
    double old_trials = static_cast<double>(best->trials);
    best->centroid = detail::weighted_unit_mean(best->centroid, old_trials, repr.vector, 1.0);
    best->mean_progress = (old_trials * best->mean_progress + report.progress) / (old_trials + 1.0);
    best->trials += 1;
    best->successes += report.success ? 1 : 0;
    if (!report.summary.empty()) best->note = detail::clip_note(report.summary, cfg.note_cap);
    best->updated_at_ms = now_ms;
  } else {
    RouterContextItem item;
    item.item_id = "item-" + zero_pad(ctx.next_item_seq++, 6);
    item.policy_id = policy_id;
    item.cluster_id = "";
    double best_cluster = -2.0;
    for (const auto& c : clusters) {
      double sim = cosine(c.centroid, repr.vector);
      if (sim > best_cluster) {
        best_cluster = sim;
        item.cluster_id = c.cluster_id;
      }
    }
    if (item.cluster_id.empty()) item.cluster_id = "cx-" + item.item_id;
    item.trials = 1;
    item.successes = report.success ? 1 : 0;
    item.mean_progress = report.progress;
    item.note = detail::clip_note(report.summary, cfg.note_cap);
    item.centroid = repr.vector;
    item.updated_at_ms = now_ms;
    ctx.items.push_back(std::move(item));
  }
  ctx.version += 1;
}

// Functional variant used by tests that diff before/after structurally.
inline RouterContext updated_context(RouterContext ctx, const TaskRepresentation& repr,
                                     const std::string& policy_id,
                                     const EvaluationReport& report,
                                     const std::vector<ClusterRef>& clusters = {},
                                     const RecorderConfig& cfg = {}, std::int64_t now_ms = 0) {
  update_context(ctx, repr, policy_id, report, clusters, cfg, now_ms);
  return ctx;
}

// Repeatedly merges same-policy item pairs whose centroids agree (cosine >=
// tau_dup). Trials and successes are summed, progress and centroid are
// trial-weighted, the smaller (older) item_id survives. Idempotent, and
// conserves per-policy trial/success totals.
inline void merge_duplicates(RouterContext& ctx, double tau_dup = 0.92) {
  bool any_change = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < ctx.items.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < ctx.items.size() && !changed; ++j) {
        RouterContextItem& a = ctx.items[i];
        RouterContextItem& b = ctx.items[j];
        if (a.policy_id != b.policy_id) continue;
        if (cosine(a.centroid, b.centroid) < tau_dup) continue;

        const bool a_older = a.item_id <= b.item_id;
        RouterContextItem& keep = a_older ? a : b;
        RouterContextItem& gone = a_older ? b : a;
        double wk = static_cast<double>(keep.trials);
        double wg = static_cast<double>(gone.trials);
        keep.centroid = detail::weighted_unit_mean(keep.centroid, wk, gone.centroid, wg);
        keep.mean_progress =
            (wk * keep.mean_progress + wg * gone.mean_progress) / (wk + wg);
        keep.trials += gone.trials;
        keep.successes += gone.successes;
        keep.updated_at_ms = std::max(keep.updated_at_ms, gone.updated_at_ms);
        if (!gone.note.empty() && gone.note != keep.note)
          keep.note = detail::clip_note(keep.note + " | " + gone.note, 2 * 160);
        ctx.items.erase(ctx.items.begin() + (a_older ? j : i));
        changed = true;
        any_change = true;
      }
    }
  }
  if (any_change) ctx.version += 1;
}

inline RouterContext merged_duplicates(RouterContext ctx, double tau_dup = 0.92) {
  merge_duplicates(ctx, tau_dup);
  return ctx;
}

// Builds the execution record for a routed episode and inserts it into the
// store. Record ids are sequence-numbered from the store's append counter.
inline ExecutionRecord write_back(const TaskRepresentation& repr, const RoutingDecision& decision,
                                  const EvaluationReport& report, RecordStore& store,
                                  std::int64_t now_ms = 0) {
  ExecutionRecord rec;
  rec.record_id = "r-" + zero_pad(store.appended() + 1, 8);
  rec.representation = repr;
  rec.policy_id = decision.chosen_policy;
  rec.report = report;
  rec.created_at_ms = now_ms;
  store.insert(rec);
  return rec;
}

// Human-readable bullet list, one line per context item.
inline std::string context_bullets(const RouterContext& ctx) {
  std::string out;
  for (const auto& it : ctx.items) {
    char line[512];
    std::snprintf(line, sizeof(line), "- [%s] %s @ %s: %llu/%llu ok, mean progress %.3f%s%s\n",
                  it.item_id.c_str(), it.policy_id.c_str(), it.cluster_id.c_str(),
                  static_cast<unsigned long long>(it.successes),
                  static_cast<unsigned long long>(it.trials), it.mean_progress,
                  it.note.empty() ? "" : " -- ", it.note.c_str());
    out += line;
  }
  return out;
}

}  // namespace relay
