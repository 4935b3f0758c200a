#pragma once
// Historical-execution database: embedding-indexed ExecutionRecords with
// exact top-k cosine retrieval and JSONL append-log persistence.
//
// File layout: one StoreHeader JSON line, then one ExecutionRecord JSON per
// line. A complete line is durable; a torn final line is dropped on load.
// A later line with an existing record_id supersedes the earlier one, which
// is how review corrections keep the full history in the log.
//
// Concurrency: many readers, one serialized writer (shared_mutex). Snapshots
// materialize an immutable copy for benchmark runs.

#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "relay/embedding.hpp"
#include "relay/types.hpp"

namespace relay {

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StoreHeader {
  int format_version = 1;
  int embedding_dim = 0;
  std::uint64_t hash_seed = 0;
  std::int64_t created_at_ms = 0;

  bool compatible_with(const StoreHeader& other, std::string* why = nullptr) const {
    if (format_version != other.format_version) {
      if (why) *why = "format_version mismatch";
      return false;
    }
    if (embedding_dim != other.embedding_dim) {
      if (why) *why = "embedding_dim mismatch";
      return false;
    }
    if (hash_seed != other.hash_seed) {
      if (why) *why = "hash_seed mismatch";
      return false;
    }
    return true;
  }
};

inline void to_json(json& j, const StoreHeader& h) {
  j = json{{"format_version", h.format_version},
           {"embedding_dim", h.embedding_dim},
           {"hash_seed", h.hash_seed},
           {"created_at_ms", h.created_at_ms}};
}
inline void from_json(const json& j, StoreHeader& h) {
  j.at("format_version").get_to(h.format_version);
  j.at("embedding_dim").get_to(h.embedding_dim);
  j.at("hash_seed").get_to(h.hash_seed);
  h.created_at_ms = j.value("created_at_ms", static_cast<std::int64_t>(0));
}

struct RetrievalHit {
  ExecutionRecord record;
  double similarity = 0.0;
};

// Optional retrieval filter over policy and creation time.
struct RecordFilter {
  std::optional<std::string> policy_id;
  std::optional<std::int64_t> created_after_ms;
  std::optional<std::int64_t> created_before_ms;

  bool matches(const ExecutionRecord& r) const {
    if (policy_id && r.policy_id != *policy_id) return false;
    if (created_after_ms && r.created_at_ms < *created_after_ms) return false;
    if (created_before_ms && r.created_at_ms > *created_before_ms) return false;
    return true;
  }
};

namespace detail {

inline bool hit_before(double sim_a, const ExecutionRecord& a, double sim_b,
                       const ExecutionRecord& b) {
  if (sim_a != sim_b) return sim_a > sim_b;
  if (a.created_at_ms != b.created_at_ms) return a.created_at_ms < b.created_at_ms;
  return a.record_id < b.record_id;
}

}  // namespace detail

class StoreSnapshot;

class RecordStore {
 public:
  explicit RecordStore(StoreHeader header) : state_(std::make_shared<State>()) {
    state_->header = header;
  }

  // Opens (or creates) a log-backed store. When the file exists its header
  // must match `header`; otherwise the file is created with it.
  static RecordStore open(const std::string& path, StoreHeader header) {
    if (std::filesystem::exists(path)) {
      RecordStore s = load(path, header);
      s.attach_log(path);
      return s;
    }
    RecordStore s(header);
    std::ofstream out(path);
    if (!out) throw StoreError("cannot create store file: " + path);
    out << serialize(header) << '\n';
    out.flush();
    s.attach_log(path);
    return s;
  }

  // Loads a store from a log file. When `expected` is given the stored
  // header must match it (version, dim, seed) or the load is refused.
  static RecordStore load(const std::string& path, std::optional<StoreHeader> expected = {}) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open store file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
      throw StoreError("store file missing header line: " + path);
    StoreHeader header;
    try {
      header = deserialize<StoreHeader>(line);
    } catch (const ParseError& e) {
      throw StoreError(std::string("bad store header: ") + e.what());
    }
    if (expected) {
      std::string why;
      if (!header.compatible_with(*expected, &why))
        throw StoreError("refusing to load store: " + why);
    }

    RecordStore store(header);
    std::vector<std::string> pending;
    while (std::getline(in, line)) pending.push_back(line);

    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].empty()) continue;
      ExecutionRecord rec;
      try {
        rec = deserialize<ExecutionRecord>(pending[i]);
      } catch (const ParseError&) {
        if (i + 1 == pending.size()) {
          // Torn final line: recover everything before it.
          store.state_->dropped_lines += 1;
          break;
        }
        throw StoreError("corrupt record line " + std::to_string(i + 2) + " in " + path);
      }
      store.apply_loaded(std::move(rec));
    }
    return store;
  }

  const StoreHeader& header() const { return state_->header; }
  std::size_t dropped_lines() const { return state_->dropped_lines; }

  // Inserts a record. The append-log entry is flushed before the call
  // returns; duplicate ids and dimension mismatches are rejected.
  std::string insert(const ExecutionRecord& rec) {
    auto violations = validate(rec, static_cast<std::size_t>(state_->header.embedding_dim));
    std::unique_lock lock(state_->mu);
    if (rec.representation.vector.size() !=
        static_cast<std::size_t>(state_->header.embedding_dim))
      throw StoreError("dimension mismatch: record dim " +
                       std::to_string(rec.representation.vector.size()) + " vs store dim " +
                       std::to_string(state_->header.embedding_dim));
    if (!violations.empty()) {
      std::string msg = "invalid record:";
      for (const auto& v : violations) msg += " [" + v + "]";
      throw StoreError(msg);
    }
    if (state_->by_id.count(rec.record_id))
      throw StoreError("duplicate record_id: " + rec.record_id);

    append_line(serialize(rec));
    state_->records.push_back(rec);
    state_->by_id.emplace(rec.record_id, state_->records.size() - 1);
    state_->appended += 1;
    return rec.record_id;
  }

  // Replaces the live version of `record_id`, keeping the old one in the
  // log. Used by human-in-the-loop review.
  ExecutionRecord revise(const std::string& record_id, const EvaluationReport& new_report) {
    std::unique_lock lock(state_->mu);
    auto it = state_->by_id.find(record_id);
    if (it == state_->by_id.end()) throw StoreError("unknown record_id: " + record_id);
    ExecutionRecord updated = state_->records[it->second];
    updated.report = new_report;
    auto violations = validate(updated, static_cast<std::size_t>(state_->header.embedding_dim));
    if (!violations.empty()) {
      std::string msg = "invalid revision:";
      for (const auto& v : violations) msg += " [" + v + "]";
      throw StoreError(msg);
    }
    append_line(serialize(updated));
    state_->records[it->second] = updated;
    state_->appended += 1;
    return updated;
  }

  std::size_t count() const {
    std::shared_lock lock(state_->mu);
    return state_->records.size();
  }

  // Total log lines appended over the store's lifetime (revisions included);
  // monotone, used for sequence-numbered record ids.
  std::uint64_t appended() const {
    std::shared_lock lock(state_->mu);
    return state_->appended;
  }

  std::optional<ExecutionRecord> get(const std::string& record_id) const {
    std::shared_lock lock(state_->mu);
    auto it = state_->by_id.find(record_id);
    if (it == state_->by_id.end()) return std::nullopt;
    return state_->records[it->second];
  }

  // Exact top-k by cosine similarity; ties go to the older record, then the
  // smaller record_id. Equals a brute-force scan by construction.
  std::vector<RetrievalHit> top_k(const TaskRepresentation& query, std::size_t k,
                                  const RecordFilter& filter = {}) const {
    if (k == 0) throw std::invalid_argument("top_k: k must be positive");
    std::shared_lock lock(state_->mu);
    return scan_top_k(state_->records, query, k, filter);
  }

  StoreSnapshot snapshot() const;

  // Full rewrite of the live set (revisions collapsed) to `path`.
  void save(const std::string& path) const {
    std::shared_lock lock(state_->mu);
    std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw StoreError("cannot write store file: " + tmp);
      out << serialize(state_->header) << '\n';
      for (const auto& rec : state_->records) out << serialize(rec) << '\n';
      out.flush();
      if (!out) throw StoreError("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::shared_lock lock(state_->mu);
    for (const auto& rec : state_->records) fn(rec);
  }

 private:
  struct State {
    StoreHeader header;
    mutable std::shared_mutex mu;
    std::deque<ExecutionRecord> records;
    std::unordered_map<std::string, std::size_t> by_id;
    std::ofstream log;
    bool logging = false;
    std::uint64_t appended = 0;
    std::size_t dropped_lines = 0;
  };

  std::shared_ptr<State> state_;

  void attach_log(const std::string& path) {
    state_->log.open(path, std::ios::app);
    if (!state_->log) throw StoreError("cannot open store log for append: " + path);
    state_->logging = true;
  }

  void append_line(const std::string& line) {
    if (!state_->logging) return;
    state_->log << line << '\n';
    state_->log.flush();
    if (!state_->log) throw StoreError("store log write failed");
  }

  void apply_loaded(ExecutionRecord rec) {
    auto it = state_->by_id.find(rec.record_id);
    if (it != state_->by_id.end()) {
      state_->records[it->second] = std::move(rec);  // later line supersedes
    } else {
      state_->records.push_back(std::move(rec));
      state_->by_id.emplace(state_->records.back().record_id, state_->records.size() - 1);
    }
    state_->appended += 1;
  }

  template <typename Container>
  static std::vector<RetrievalHit> scan_top_k(const Container& records,
                                              const TaskRepresentation& query, std::size_t k,
                                              const RecordFilter& filter) {
    std::vector<RetrievalHit> hits;
    for (const auto& rec : records) {
      if (!filter.matches(rec)) continue;
      double sim = cosine(query.vector, rec.representation.vector);
      hits.push_back(RetrievalHit{rec, sim});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
      return detail::hit_before(a.similarity, a.record, b.similarity, b.record);
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
  }

  friend class StoreSnapshot;
};

// Immutable point-in-time view; unaffected by later inserts or revisions.
class StoreSnapshot {
 public:
  StoreSnapshot(StoreHeader header, std::shared_ptr<const std::vector<ExecutionRecord>> data)
      : header_(header), data_(std::move(data)) {}

  std::size_t count() const { return data_->size(); }
  const StoreHeader& header() const { return header_; }
  const std::vector<ExecutionRecord>& records() const { return *data_; }

  std::vector<RetrievalHit> top_k(const TaskRepresentation& query, std::size_t k,
                                  const RecordFilter& filter = {}) const {
    if (k == 0) throw std::invalid_argument("top_k: k must be positive");
    return RecordStore::scan_top_k(*data_, query, k, filter);
  }

 private:
  StoreHeader header_;
  std::shared_ptr<const std::vector<ExecutionRecord>> data_;
};

inline StoreSnapshot RecordStore::snapshot() const {
  std::shared_lock lock(state_->mu);
  auto copy = std::make_shared<std::vector<ExecutionRecord>>(state_->records.begin(),
                                                             state_->records.end());
  return StoreSnapshot(state_->header, std::move(copy));
}

}  // namespace relay
