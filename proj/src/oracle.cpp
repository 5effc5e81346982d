#include "tabfuse/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

namespace tabfuse {

using nlohmann::json;

std::string to_string(TaskTag t) {
  switch (t) {
    case TaskTag::schema_match: return "schema_match";
    case TaskTag::taxonomy_map: return "taxonomy_map";
    case TaskTag::pair_label: return "pair_label";
    case TaskTag::fusion_select_entities: return "fusion_select_entities";
    case TaskTag::fusion_groundtruth: return "fusion_groundtruth";
    case TaskTag::embedding: return "embedding";
  }
  return "unknown";
}

std::string stable_digest(std::string_view data) {
  // two independent FNV streams -> 128 bits
  const std::uint64_t h1 = fnv1a64(data);
  const std::uint64_t h2 = fnv1a64(data, 0x9E3779B97F4A7C15ULL);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(h1),
                static_cast<unsigned long long>(h2));
  return buf;
}

std::string OracleRequest::hash() const {
  std::string blob = to_string(task_tag);
  blob += '\x1f';
  blob += system_text;
  blob += '\x1f';
  blob += user_text;
  blob += '\x1f';
  blob += response_contract.description;
  blob += '\x1f';
  blob += std::to_string(static_cast<int>(response_contract.shape));
  for (const auto& k : response_contract.required_keys) {
    blob += '\x1f';
    blob += k;
  }
  return stable_digest(blob);
}

std::int64_t UsageLedger::total_micro() const {
  std::int64_t total = 0;
  for (const auto& e : entries_) total += e.cost_micro;
  return total;
}

std::map<std::string, std::int64_t> UsageLedger::per_task_micro() const {
  std::map<std::string, std::int64_t> out;
  for (const auto& e : entries_) out[e.task] += e.cost_micro;
  return out;
}

json UsageLedger::to_json() const {
  json steps = json::object();
  for (const auto& [task, micro] : per_task_micro()) {
    steps[task] = {{"cost_micro", micro}, {"cost", format_micro(micro)}};
  }
  return json{{"per_task", steps},
              {"total_micro", total_micro()},
              {"total", format_micro(total_micro())},
              {"entry_count", entries_.size()}};
}

std::string format_micro(std::int64_t micro) {
  const bool neg = micro < 0;
  std::uint64_t abs = neg ? static_cast<std::uint64_t>(-micro) : static_cast<std::uint64_t>(micro);
  const std::uint64_t dollars = abs / 1000000;
  const std::uint64_t cents = (abs % 1000000 + 5000) / 10000;  // half-up to cents
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s$%llu.%02llu", neg ? "-" : "",
                static_cast<unsigned long long>(dollars + cents / 100),
                static_cast<unsigned long long>(cents % 100));
  return buf;
}

Oracle::Oracle(OracleSettings settings) : settings_(std::move(settings)) {
  const int slots = std::clamp(settings_.max_inflight, 1, 64);
  inflight_ = std::make_unique<std::counting_semaphore<64>>(slots);
  if (!settings_.cache_path.empty()) load_cache_file();
}

void Oracle::load_cache_file() {
  std::ifstream in(settings_.cache_path);
  if (!in) return;  // fresh cache
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("hash") || !j.contains("payload")) continue;
    cache_[j["hash"].get<std::string>()] = j["payload"].get<std::string>();
  }
}

std::optional<std::string> Oracle::cache_lookup(const std::string& key) const {
  std::lock_guard lock(cache_mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

void Oracle::cache_store(const std::string& key, const std::string& kind,
                         const std::string& payload) {
  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, payload);
  if (!inserted) return;
  if (settings_.cache_path.empty()) return;
  std::ofstream out(settings_.cache_path, std::ios::app);
  out << json{{"hash", key}, {"kind", kind}, {"payload", payload}}.dump() << '\n';
}

void Oracle::check_budget() const {
  if (settings_.budget_micro < 0) return;
  std::lock_guard lock(ledger_mutex_);
  if (ledger_.total_micro() >= settings_.budget_micro)
    throw BudgetExhausted("oracle budget exhausted: " + format_micro(ledger_.total_micro()) +
                          " of " + format_micro(settings_.budget_micro));
}

void Oracle::charge(TaskTag tag, std::int64_t in_units, std::int64_t out_units, bool is_embed) {
  LedgerEntry e;
  e.task = to_string(tag);
  e.input_units = in_units;
  e.output_units = out_units;
  const std::int64_t pin = is_embed ? settings_.price_embed_micro_per_1k
                                    : settings_.price_in_micro_per_1k;
  const std::int64_t pout = is_embed ? 0 : settings_.price_out_micro_per_1k;
  e.cost_micro = (in_units * pin + 500) / 1000 + (out_units * pout + 500) / 1000;
  std::lock_guard lock(ledger_mutex_);
  ledger_.append(std::move(e));
}

Oracle::Completion Oracle::complete_with_retries(const OracleRequest& request,
                                                 const std::string& repair_note) {
  int attempts = settings_.retries + 1;
  std::chrono::milliseconds backoff(250);
  for (int i = 0; i < attempts; ++i) {
    try {
      return complete(request, repair_note);
    } catch (const BudgetExhausted&) {
      throw;
    } catch (const std::exception& e) {
      if (i + 1 == attempts)
        throw OracleError(std::string("oracle transport failed after retries: ") + e.what());
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw OracleError("unreachable");
}

json Oracle::invoke(const OracleRequest& request) {
  const std::string key = request.hash();
  if (auto hit = cache_lookup(key)) return json::parse(*hit);

  check_budget();
  inflight_->acquire();
  struct Release {
    std::counting_semaphore<64>* s;
    ~Release() { s->release(); }
  } release{inflight_.get()};

  Completion c = complete_with_retries(request, "");
  charge(request.task_tag, c.input_units, c.output_units, false);

  json reply;
  std::optional<std::string> err;
  try {
    reply = parse_reply_json(c.text);
    err = validate_reply(request.response_contract, reply);
  } catch (const OracleError& e) {
    err = e.what();
  }
  if (err) {
    // one structured-repair re-prompt, then give up carrying the raw reply
    const std::string note = "Previous reply was rejected: " + *err +
                             ". Reply with JSON only, exactly matching: " +
                             request.response_contract.description;
    Completion r = complete_with_retries(request, note);
    charge(request.task_tag, r.input_units, r.output_units, false);
    try {
      reply = parse_reply_json(r.text);
    } catch (const OracleError&) {
      throw OracleError("oracle reply violated contract after repair", r.text);
    }
    if (auto err2 = validate_reply(request.response_contract, reply))
      throw OracleError("oracle reply violated contract after repair: " + *err2, r.text);
  }

  cache_store(key, "chat", reply.dump());
  return reply;
}

std::vector<EmbeddingVector> Oracle::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw OracleError("embed: empty input batch");

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<size_t> missing;
  for (size_t i = 0; i < texts.size(); ++i) {
    const std::string key = stable_digest("embed\x1f" + settings_.embed_model + "\x1f" + texts[i]);
    if (auto hit = cache_lookup(key)) {
      json j = json::parse(*hit);
      EmbeddingVector v(j.size());
      for (size_t d = 0; d < j.size(); ++d) v[static_cast<Eigen::Index>(d)] = j[d].get<float>();
      out[i] = std::move(v);
    } else {
      missing.push_back(i);
    }
  }

  for (size_t start = 0; start < missing.size(); start += kEmbedBatch) {
    const size_t end = std::min(missing.size(), start + kEmbedBatch);
    std::vector<std::string> batch;
    batch.reserve(end - start);
    for (size_t i = start; i < end; ++i) batch.push_back(texts[missing[i]]);

    check_budget();
    inflight_->acquire();
    struct Release {
      std::counting_semaphore<64>* s;
      ~Release() { s->release(); }
    } release{inflight_.get()};

    std::int64_t in_units = 0;
    auto vectors = embed_transport(batch, in_units);
    if (vectors.size() != batch.size())
      throw OracleError("embed: transport returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(batch.size()) + " texts");
    charge(TaskTag::embedding, in_units, 0, true);

    Eigen::Index dim = vectors.empty() ? 0 : vectors.front().size();
    for (size_t i = 0; i < vectors.size(); ++i) {
      if (vectors[i].size() != dim)
        throw OracleError("embed: dimension mismatch within batch");
      json j = json::array();
      for (Eigen::Index d = 0; d < vectors[i].size(); ++d) j.push_back(vectors[i][d]);
      const std::string key =
          stable_digest("embed\x1f" + settings_.embed_model + "\x1f" + batch[i]);
      cache_store(key, "embed", j.dump());
      out[missing[start + i]] = std::move(vectors[i]);
    }
  }

  // all vectors from one embedder share a dimension
  const Eigen::Index dim = out.front().size();
  for (const auto& v : out)
    if (v.size() != dim) throw OracleError("embed: dimension mismatch across batches");
  return out;
}

UsageLedger Oracle::usage_snapshot() const {
  std::lock_guard lock(ledger_mutex_);
  return ledger_;
}

json Oracle::usage_report() const { return usage_snapshot().to_json(); }

std::optional<std::string> validate_reply(const ResponseContract& contract, const json& reply) {
  auto check_keys = [&](const json& obj) -> std::optional<std::string> {
    if (!obj.is_object()) return "expected a JSON object";
    for (const auto& k : contract.required_keys)
      if (!obj.contains(k)) return "missing required key '" + k + "'";
    return std::nullopt;
  };
  if (contract.shape == ResponseContract::Shape::object) return check_keys(reply);
  if (!reply.is_array()) return "expected a JSON array";
  for (const auto& el : reply)
    if (auto err = check_keys(el)) return err;
  return std::nullopt;
}

json parse_reply_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded()) return j;
  // tolerate fenced or chatty replies: widest {...} / [...] span
  const size_t obj = text.find_first_of("{[");
  if (obj != std::string::npos) {
    const char open = text[obj];
    const char close = open == '{' ? '}' : ']';
    const size_t last = text.find_last_of(close);
    if (last != std::string::npos && last > obj) {
      j = json::parse(text.substr(obj, last - obj + 1), nullptr, false);
      if (!j.is_discarded()) return j;
    }
  }
  throw OracleError("reply is not valid JSON", text);
}

std::string compose_user_text(const std::string& instructions, const json& payload) {
  return instructions + "\n\n```json\n" + payload.dump(2) + "\n```\n";
}

json extract_payload(const std::string& user_text) {
  const std::string marker = "```json\n";
  const size_t pos = user_text.find(marker);
  if (pos == std::string::npos) throw OracleError("request carries no JSON payload block");
  const size_t start = pos + marker.size();
  const size_t end = user_text.find("\n```", start);
  if (end == std::string::npos) throw OracleError("unterminated JSON payload block");
  return json::parse(user_text.substr(start, end - start));
}

}  // namespace tabfuse
