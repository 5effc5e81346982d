#include "tabfuse/schema_matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tabfuse/text.hpp"

namespace tabfuse {

using nlohmann::json;

std::string to_string(MatcherKind m) {
  switch (m) {
    case MatcherKind::label: return "label";
    case MatcherKind::instance: return "instance";
    case MatcherKind::oracle: return "oracle";
    case MatcherKind::manual: return "manual";
  }
  return "manual";
}

namespace {

struct ScoredPair {
  std::string source;
  std::string target;
  double score;
};

/// Greedy one-to-one: descending score, ties by (source, target) name order.
std::vector<ScoredPair> one_to_one(std::vector<ScoredPair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.source != b.source) return a.source < b.source;
    return a.target < b.target;
  });
  std::set<std::string> used_source, used_target;
  std::vector<ScoredPair> kept;
  for (auto& p : pairs) {
    if (used_source.count(p.source) || used_target.count(p.target)) continue;
    used_source.insert(p.source);
    used_target.insert(p.target);
    kept.push_back(std::move(p));
  }
  return kept;
}

}  // namespace

std::vector<SchemaCorrespondence> match_labels(const Dataset& source, const TargetSchema& target,
                                               StringMetric inner_metric,
                                               const SchemaMatchOptions& options) {
  std::vector<ScoredPair> candidates;
  for (const auto& src_attr : source.attributes()) {
    const auto src_tokens = label_tokens(src_attr.name);
    double best = -1.0;
    std::string best_target;
    for (const auto& tgt_attr : target.attributes) {
      const double s = monge_elkan(src_tokens, label_tokens(tgt_attr.name), inner_metric);
      if (s > best || (s == best && tgt_attr.name < best_target)) {
        best = s;
        best_target = tgt_attr.name;
      }
    }
    if (best >= options.label_threshold)
      candidates.push_back({src_attr.name, best_target, best});
  }
  std::vector<SchemaCorrespondence> out;
  for (auto& p : one_to_one(std::move(candidates)))
    out.push_back({source.name(), p.source, p.target, p.score, MatcherKind::label});
  return out;
}

std::vector<SchemaCorrespondence> match_labels_auto(
    const Dataset& source, const TargetSchema& target,
    const std::vector<SchemaCorrespondence>& gold, const SchemaMatchOptions& options) {
  std::vector<SchemaCorrespondence> best;
  double best_f1 = -1.0;
  for (StringMetric m : {StringMetric::levenshtein_sim, StringMetric::jaro_winkler}) {
    auto cs = match_labels(source, target, m, options);
    const double f1 = evaluate_correspondences(cs, gold).macro_f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = std::move(cs);
    }
  }
  return best;
}

std::vector<SchemaCorrespondence> match_instances(const Dataset& source,
                                                  const Dataset& target_reference,
                                                  const SchemaMatchOptions& options) {
  if (target_reference.row_count() == 0) return {};

  // one document per column: whitespace tokens of all non-null values
  struct ColumnDoc {
    std::string name;
    bool is_source;
    std::unordered_map<std::string, double> tf;
  };
  std::vector<ColumnDoc> docs;
  auto add_docs = [&](const Dataset& ds, bool is_source) {
    for (size_t a = 0; a < ds.attributes().size(); ++a) {
      ColumnDoc doc;
      doc.name = ds.attributes()[a].name;
      doc.is_source = is_source;
      for (const auto& rec : ds.records()) {
        const Value& v = rec.values[a];
        if (is_null(v)) continue;
        for (auto& tok : whitespace_tokens(value_to_string(v))) doc.tf[to_lower(tok)] += 1.0;
      }
      docs.push_back(std::move(doc));
    }
  };
  add_docs(source, true);
  add_docs(target_reference, false);

  // smoothed idf: ln((1+N)/(1+df)) + 1
  std::unordered_map<std::string, double> df;
  for (const auto& doc : docs) {
    for (const auto& [term, _] : doc.tf) df[term] += 1.0;
  }
  const double n_docs = static_cast<double>(docs.size());
  auto idf = [&](const std::string& term) {
    return std::log((1.0 + n_docs) / (1.0 + df[term])) + 1.0;
  };

  std::vector<std::unordered_map<std::string, double>> weighted(docs.size());
  std::vector<double> norms(docs.size(), 0.0);
  for (size_t d = 0; d < docs.size(); ++d) {
    for (const auto& [term, count] : docs[d].tf) {
      const double w = count * idf(term);
      weighted[d][term] = w;
      norms[d] += w * w;
    }
    norms[d] = std::sqrt(norms[d]);
  }

  std::vector<ScoredPair> candidates;
  for (size_t s = 0; s < docs.size(); ++s) {
    if (!docs[s].is_source) continue;
    double best = -1.0;
    std::string best_target;
    for (size_t t = 0; t < docs.size(); ++t) {
      if (docs[t].is_source) continue;
      double dot = 0.0;
      const auto& small = weighted[s].size() <= weighted[t].size() ? weighted[s] : weighted[t];
      const auto& large = weighted[s].size() <= weighted[t].size() ? weighted[t] : weighted[s];
      for (const auto& [term, w] : small) {
        auto it = large.find(term);
        if (it != large.end()) dot += w * it->second;
      }
      const double denom = norms[s] * norms[t];
      const double cos = denom == 0.0 ? 0.0 : dot / denom;
      if (cos > best || (cos == best && docs[t].name < best_target)) {
        best = cos;
        best_target = docs[t].name;
      }
    }
    if (best >= options.instance_threshold)
      candidates.push_back({docs[s].name, best_target, best});
  }

  std::vector<SchemaCorrespondence> out;
  for (auto& p : one_to_one(std::move(candidates)))
    out.push_back({source.name(), p.source, p.target, p.score, MatcherKind::instance});
  return out;
}

namespace {

/// The sample_rows most complete rows (ties by row order) as a plain-text grid.
std::string render_sample_rows(const Dataset& ds, size_t sample_rows) {
  std::vector<std::pair<size_t, size_t>> by_completeness;  // (non-null count, row)
  for (size_t r = 0; r < ds.row_count(); ++r) {
    size_t non_null = 0;
    for (const auto& v : ds.records()[r].values)
      if (!is_null(v)) ++non_null;
    by_completeness.emplace_back(non_null, r);
  }
  std::stable_sort(by_completeness.begin(), by_completeness.end(),
                   [](auto& a, auto& b) { return a.first > b.first; });

  std::ostringstream grid;
  for (size_t a = 0; a < ds.attributes().size(); ++a) {
    if (a) grid << " | ";
    grid << ds.attributes()[a].name;
  }
  grid << '\n';
  const size_t n = std::min(sample_rows, by_completeness.size());
  for (size_t i = 0; i < n; ++i) {
    const auto& rec = ds.records()[by_completeness[i].second];
    for (size_t a = 0; a < rec.values.size(); ++a) {
      if (a) grid << " | ";
      grid << value_to_string(rec.values[a]);
    }
    grid << '\n';
  }
  return grid.str();
}

json target_schema_document(const TargetSchema& target) {
  json attrs = json::array();
  for (const auto& a : target.attributes) {
    json ja{{"name", a.name}, {"type", to_string(a.declared_type)}};
    if (!a.description.empty()) ja["description"] = a.description;
    if (a.value_set) ja["value_set"] = *a.value_set;
    attrs.push_back(std::move(ja));
  }
  return json{{"id_attribute", target.id_attribute}, {"attributes", attrs}};
}

}  // namespace

std::vector<SchemaCorrespondence> match_with_oracle(const Dataset& source,
                                                    const TargetSchema& target, Oracle& oracle,
                                                    const SchemaMatchOptions& options) {
  if (source.attributes().empty()) return {};

  json columns = json::array();
  for (size_t a = 0; a < source.attributes().size(); ++a) {
    std::map<std::string, size_t> counts;
    for (const auto& rec : source.records()) {
      const Value& v = rec.values[a];
      if (!is_null(v)) counts[value_to_string(v)]++;
    }
    std::vector<std::pair<std::string, size_t>> by_freq(counts.begin(), counts.end());
    std::stable_sort(by_freq.begin(), by_freq.end(),
                     [](auto& x, auto& y) { return x.second > y.second; });
    json top = json::array();
    for (size_t i = 0; i < std::min(options.top_values, by_freq.size()); ++i)
      top.push_back(by_freq[i].first);
    columns.push_back(json{{"name", source.attributes()[a].name},
                           {"unique_count", counts.size()},
                           {"top_values", top}});
  }

  json payload{{"dataset", source.name()},
               {"columns", columns},
               {"sample_rows", render_sample_rows(source, options.sample_rows)},
               {"target_schema", target_schema_document(target)}};

  OracleRequest req;
  req.task_tag = TaskTag::schema_match;
  req.system_text =
      "You are a schema alignment expert. Match source table columns to target "
      "schema attributes.";
  req.user_text = compose_user_text(
      "Match each source column to at most one target attribute, or to no "
      "attribute when nothing fits. Column headers may be non-descriptive; in "
      "that case infer attribute semantics from the data values in the value "
      "summaries and sample rows.",
      payload);
  req.response_contract.description =
      R"({"correspondences": [{"source_column": string, "target_column": string or null}]})";
  req.response_contract.shape = ResponseContract::Shape::object;
  req.response_contract.required_keys = {"correspondences"};

  json reply = oracle.invoke(req);

  std::vector<SchemaCorrespondence> out;
  std::set<std::string> seen_sources, seen_targets;
  for (const auto& c : reply.at("correspondences")) {
    if (!c.contains("target_column") || c["target_column"].is_null()) continue;  // NONE
    const std::string src = c.value("source_column", "");
    const std::string tgt = c["target_column"].get<std::string>();
    if (!source.attribute_index(src)) continue;
    if (!target.find(tgt)) continue;
    if (!seen_sources.insert(src).second || !seen_targets.insert(tgt).second) continue;
    out.push_back({source.name(), src, tgt, 1.0, MatcherKind::oracle});
  }
  return out;
}

MatchEvaluation evaluate_correspondences(const std::vector<SchemaCorrespondence>& predicted,
                                         const std::vector<SchemaCorrespondence>& gold) {
  std::set<std::string> datasets;
  auto key = [](const SchemaCorrespondence& c) {
    return c.source_attribute + "\x1f" + c.target_attribute;
  };
  std::map<std::string, std::set<std::string>> pred, gold_by_ds;
  for (const auto& c : predicted) {
    pred[c.source_dataset].insert(key(c));
    datasets.insert(c.source_dataset);
  }
  for (const auto& c : gold) {
    gold_by_ds[c.source_dataset].insert(key(c));
    datasets.insert(c.source_dataset);
  }

  MatchEvaluation eval;
  double f1_sum = 0.0;
  for (const auto& ds : datasets) {
    const auto& p = pred[ds];
    const auto& g = gold_by_ds[ds];
    size_t tp = 0;
    for (const auto& k : p)
      if (g.count(k)) ++tp;
    PrecisionRecall pr;
    pr.precision = p.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(p.size());
    pr.recall = g.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(g.size());
    pr.f1 = (pr.precision + pr.recall) == 0.0
                ? 0.0
                : 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall);
    f1_sum += pr.f1;
    eval.per_dataset[ds] = pr;
  }
  eval.macro_f1 = datasets.empty() ? 0.0 : f1_sum / static_cast<double>(datasets.size());
  return eval;
}

double round3(double v) { return std::floor(v * 1000.0 + 0.5) / 1000.0; }

json correspondences_to_json(const std::vector<SchemaCorrespondence>& cs) {
  json arr = json::array();
  for (const auto& c : cs) {
    arr.push_back(json{{"source_dataset", c.source_dataset},
                       {"source_attribute", c.source_attribute},
                       {"target_attribute", c.target_attribute},
                       {"score", c.score},
                       {"matcher", to_string(c.matcher)}});
  }
  return arr;
}

std::vector<SchemaCorrespondence> correspondences_from_json(const json& arr) {
  std::vector<SchemaCorrespondence> out;
  for (const auto& j : arr) {
    SchemaCorrespondence c;
    c.source_dataset = j.at("source_dataset").get<std::string>();
    c.source_attribute = j.at("source_attribute").get<std::string>();
    c.target_attribute = j.at("target_attribute").get<std::string>();
    c.score = j.value("score", 1.0);
    const std::string m = j.value("matcher", "manual");
    c.matcher = m == "label"      ? MatcherKind::label
                : m == "instance" ? MatcherKind::instance
                : m == "oracle"   ? MatcherKind::oracle
                                  : MatcherKind::manual;
    out.push_back(std::move(c));
  }
  return out;
}

void save_correspondences(const std::vector<SchemaCorrespondence>& cs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write correspondences: " + path);
  out << correspondences_to_json(cs).dump(2) << '\n';
}

std::vector<SchemaCorrespondence> load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open correspondences: " + path);
  return correspondences_from_json(json::parse(in));
}

std::map<std::string, std::string> correspondence_map(
    const std::vector<SchemaCorrespondence>& cs, const std::string& dataset) {
  std::map<std::string, std::string> out;
  for (const auto& c : cs)
    if (c.source_dataset == dataset) out[c.target_attribute] = c.source_attribute;
  return out;
}

}  // namespace tabfuse
