#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "tabfuse/common.hpp"

namespace tabfuse {

using EmbeddingVector = Eigen::VectorXf;

enum class TaskTag {
  schema_match,
  taxonomy_map,
  pair_label,
  fusion_select_entities,
  fusion_groundtruth,
  embedding,  // ledger attribution for embed() calls
};

std::string to_string(TaskTag t);

/// Machine-checkable reply shape. The description is embedded in the prompt;
/// shape and required keys drive validation and the single repair re-prompt.
struct ResponseContract {
  enum class Shape { object, array };
  std::string description;
  Shape shape = Shape::object;
  std::vector<std::string> required_keys;
};

struct OracleRequest {
  TaskTag task_tag = TaskTag::schema_match;
  std::string system_text;
  std::string user_text;
  ResponseContract response_contract;

  /// Stable digest of all fields; cache key and mock determinism anchor.
  std::string hash() const;
};

struct LedgerEntry {
  std::string task;
  std::int64_t input_units = 0;
  std::int64_t output_units = 0;
  std::int64_t cost_micro = 0;  // integer micro-currency
};

/// Append-only usage log; aggregates are recomputable from the entries.
class UsageLedger {
 public:
  void append(LedgerEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::int64_t total_micro() const;
  std::map<std::string, std::int64_t> per_task_micro() const;
  nlohmann::json to_json() const;

 private:
  std::vector<LedgerEntry> entries_;
};

/// Formats integer micro-units as a dollar string, e.g. 9160000 -> "$9.16".
std::string format_micro(std::int64_t micro);

struct OracleSettings {
  std::string model = "gpt-5.2";
  std::string embed_model = "text-embedding-3-small";
  std::string endpoint = "http://localhost:8000/v1";
  std::string api_key_env = "TABFUSE_API_KEY";
  // micro-currency per 1000 units (prompt, completion, embedding input)
  std::int64_t price_in_micro_per_1k = 1250;
  std::int64_t price_out_micro_per_1k = 10000;
  std::int64_t price_embed_micro_per_1k = 20;
  std::int64_t budget_micro = -1;  // negative: unlimited
  int retries = 2;
  int max_inflight = 4;
  int embed_dimension = 256;  // mock embedder width
  std::string cache_path;     // empty: in-memory only
};

/// Gateway to all LLM-style capabilities. Handles caching, budget
/// enforcement, the cost ledger, retry/repair, and bounded concurrency;
/// concrete transports implement complete() and embed_batch().
class Oracle {
 public:
  explicit Oracle(OracleSettings settings);
  virtual ~Oracle() = default;

  /// Returns the parsed structured reply. Cache hits bypass transport and
  /// cost nothing; every non-cached transport call appends a ledger entry.
  nlohmann::json invoke(const OracleRequest& request);

  /// Order-preserving; deterministic for the mock embedder. Cached per text.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

  UsageLedger usage_snapshot() const;
  nlohmann::json usage_report() const;
  const OracleSettings& settings() const { return settings_; }

  /// Batch size used by embed(); exposed for call-count accounting.
  static constexpr size_t kEmbedBatch = 512;

 protected:
  struct Completion {
    std::string text;
    std::int64_t input_units = 0;
    std::int64_t output_units = 0;
  };
  /// One transport round-trip; repair_note is non-empty on the repair re-prompt.
  virtual Completion complete(const OracleRequest& request, const std::string& repair_note) = 0;
  virtual std::vector<EmbeddingVector> embed_transport(const std::vector<std::string>& texts,
                                                       std::int64_t& input_units) = 0;

  OracleSettings settings_;

 private:
  Completion complete_with_retries(const OracleRequest& request, const std::string& repair_note);
  void charge(TaskTag tag, std::int64_t in_units, std::int64_t out_units, bool is_embed);
  void check_budget() const;
  std::optional<std::string> cache_lookup(const std::string& key) const;
  void cache_store(const std::string& key, const std::string& kind, const std::string& payload);
  void load_cache_file();

  mutable std::mutex ledger_mutex_;
  UsageLedger ledger_;
  mutable std::mutex cache_mutex_;
  std::map<std::string, std::string> cache_;
  std::unique_ptr<std::counting_semaphore<64>> inflight_;
};

/// Validates a reply against the contract; returns an error message or nullopt.
std::optional<std::string> validate_reply(const ResponseContract& contract,
                                          const nlohmann::json& reply);

/// Extracts the JSON body from an LLM reply (tolerates markdown fences).
nlohmann::json parse_reply_json(const std::string& text);

/// Builds the canonical user text: instructions followed by one fenced JSON
/// payload block. extract_payload() recovers the block (used by the mock).
std::string compose_user_text(const std::string& instructions, const nlohmann::json& payload);
nlohmann::json extract_payload(const std::string& user_text);

// ---------------------------------------------------------------------------
// Deterministic mock

/// Scripted ground-truth tables driving the mock rulebook.
struct MockTables {
  // dataset -> source attribute -> target attribute
  std::map<std::string, std::map<std::string, std::string>> schema_synonyms;
  // raw value -> target taxonomy value (matched case-insensitively)
  std::map<std::string, std::string> taxonomy;
  // canonical "ds_a|id_a|ds_b|id_b" keys of true matches
  std::set<std::string> match_pairs;
  // record ids of well-known entities (fusion validation selection)
  std::set<std::string> well_known_records;
  // record id -> target attribute -> true value (as canonical string)
  std::map<std::string, std::map<std::string, std::string>> fusion_truth;

  static std::string pair_key(const std::string& ds_a, const std::string& id_a,
                              const std::string& ds_b, const std::string& id_b);
  static MockTables load(const std::string& path);
  void save(const std::string& path) const;
};

/// Offline oracle: replies are pure functions of the request (no wall clock,
/// no RNG), so runs are reproducible across processes.
class MockOracle : public Oracle {
 public:
  explicit MockOracle(OracleSettings settings = {}, MockTables tables = {});

  MockTables& tables() { return tables_; }

  /// Test hooks: make the next n transport calls fail / reply with garbage.
  void fail_next(int n) { fail_next_ = n; }
  void malform_next(int n) { malform_next_ = n; }

  /// The hashed-trigram embedding used for both embed() and the rulebook.
  static EmbeddingVector hash_embedding(const std::string& text, int dimension);

 protected:
  Completion complete(const OracleRequest& request, const std::string& repair_note) override;
  std::vector<EmbeddingVector> embed_transport(const std::vector<std::string>& texts,
                                               std::int64_t& input_units) override;

 private:
  nlohmann::json answer(const OracleRequest& request) const;
  MockTables tables_;
  int fail_next_ = 0;
  int malform_next_ = 0;
};

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP transport

/// Speaks the chat-completions + embeddings protocol against a configurable
/// endpoint; the vendor is not hard-wired.
class RemoteOracle : public Oracle {
 public:
  explicit RemoteOracle(OracleSettings settings);

 protected:
  Completion complete(const OracleRequest& request, const std::string& repair_note) override;
  std::vector<EmbeddingVector> embed_transport(const std::vector<std::string>& texts,
                                               std::int64_t& input_units) override;

 private:
  std::string host_;
  std::string path_prefix_;
  std::string api_key_;
};

}  // namespace tabfuse
