#include <fstream>

#include "tabfuse/oracle.hpp"
#include "tabfuse/similarity.hpp"
#include "tabfuse/text.hpp"

namespace tabfuse {

using nlohmann::json;

std::string MockTables::pair_key(const std::string& ds_a, const std::string& id_a,
                                 const std::string& ds_b, const std::string& id_b) {
  // canonical: dataset-name order
  if (ds_a < ds_b || (ds_a == ds_b && id_a <= id_b))
    return ds_a + "|" + id_a + "|" + ds_b + "|" + id_b;
  return ds_b + "|" + id_b + "|" + ds_a + "|" + id_a;
}

MockTables MockTables::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mock tables: " + path);
  json j = json::parse(in);
  MockTables t;
  for (const auto& [ds, m] : j.value("schema_synonyms", json::object()).items())
    for (const auto& [src, tgt] : m.items()) t.schema_synonyms[ds][src] = tgt.get<std::string>();
  for (const auto& [raw, tgt] : j.value("taxonomy", json::object()).items())
    t.taxonomy[raw] = tgt.get<std::string>();
  for (const auto& k : j.value("match_pairs", json::array()))
    t.match_pairs.insert(k.get<std::string>());
  for (const auto& k : j.value("well_known_records", json::array()))
    t.well_known_records.insert(k.get<std::string>());
  for (const auto& [rid, m] : j.value("fusion_truth", json::object()).items())
    for (const auto& [attr, val] : m.items()) t.fusion_truth[rid][attr] = val.get<std::string>();
  return t;
}

void MockTables::save(const std::string& path) const {
  json j;
  j["schema_synonyms"] = json::object();
  for (const auto& [ds, m] : schema_synonyms) {
    json jm = json::object();
    for (const auto& [src, tgt] : m) jm[src] = tgt;
    j["schema_synonyms"][ds] = std::move(jm);
  }
  j["taxonomy"] = json::object();
  for (const auto& [raw, tgt] : taxonomy) j["taxonomy"][raw] = tgt;
  j["match_pairs"] = json::array();
  for (const auto& k : match_pairs) j["match_pairs"].push_back(k);
  j["well_known_records"] = json::array();
  for (const auto& k : well_known_records) j["well_known_records"].push_back(k);
  j["fusion_truth"] = json::object();
  for (const auto& [rid, m] : fusion_truth) {
    json jm = json::object();
    for (const auto& [attr, val] : m) jm[attr] = val;
    j["fusion_truth"][rid] = std::move(jm);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write mock tables: " + path);
  out << j.dump(2) << '\n';
}

MockOracle::MockOracle(OracleSettings settings, MockTables tables)
    : Oracle(std::move(settings)), tables_(std::move(tables)) {}

EmbeddingVector MockOracle::hash_embedding(const std::string& text, int dimension) {
  EmbeddingVector v = EmbeddingVector::Zero(dimension);
  const std::string s = to_lower(text);
  if (s.size() < 3) {
    if (!s.empty()) v[static_cast<Eigen::Index>(fnv1a64(s) % dimension)] += 1.0f;
  } else {
    for (size_t i = 0; i + 3 <= s.size(); ++i) {
      const std::uint64_t h = fnv1a64(std::string_view(s).substr(i, 3));
      v[static_cast<Eigen::Index>(h % dimension)] += 1.0f;
    }
  }
  const float n = v.norm();
  if (n == 0.0f) {
    v[0] = 1.0f;  // embedding of the empty string: fixed unit vector
    return v;
  }
  return v / n;
}

std::vector<EmbeddingVector> MockOracle::embed_transport(const std::vector<std::string>& texts,
                                                         std::int64_t& input_units) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  input_units = 0;
  for (const auto& t : texts) {
    input_units += static_cast<std::int64_t>(t.size() / 4 + 1);
    out.push_back(hash_embedding(t, settings_.embed_dimension));
  }
  return out;
}

Oracle::Completion MockOracle::complete(const OracleRequest& request,
                                        const std::string& repair_note) {
  if (fail_next_ > 0) {
    --fail_next_;
    throw std::runtime_error("mock transport failure (scripted)");
  }
  Completion c;
  const std::int64_t prompt_len =
      static_cast<std::int64_t>(request.system_text.size() + request.user_text.size() +
                                repair_note.size());
  c.input_units = prompt_len / 4 + 1;
  if (malform_next_ > 0) {
    --malform_next_;
    c.text = "I am sorry, I cannot answer in the requested format.";
  } else {
    c.text = answer(request).dump();
  }
  c.output_units = static_cast<std::int64_t>(c.text.size()) / 4 + 1;
  return c;
}

json MockOracle::answer(const OracleRequest& request) const {
  const json payload = extract_payload(request.user_text);
  switch (request.task_tag) {
    case TaskTag::schema_match: {
      const std::string dataset = payload.value("dataset", "");
      const auto syn = tables_.schema_synonyms.find(dataset);
      std::set<std::string> target_names;
      if (payload.contains("target_schema"))
        for (const auto& a : payload["target_schema"]["attributes"])
          target_names.insert(a["name"].get<std::string>());
      json arr = json::array();
      for (const auto& col : payload.at("columns")) {
        const std::string name = col.at("name").get<std::string>();
        json corr{{"source_column", name}, {"target_column", nullptr}};
        if (syn != tables_.schema_synonyms.end()) {
          auto it = syn->second.find(name);
          if (it != syn->second.end()) corr["target_column"] = it->second;
        }
        if (corr["target_column"].is_null() && target_names.count(name))
          corr["target_column"] = name;  // exact-name fallback
        arr.push_back(std::move(corr));
      }
      return json{{"correspondences", arr}};
    }
    case TaskTag::taxonomy_map: {
      std::set<std::string> value_set;
      std::map<std::string, std::string> value_set_ci;
      for (const auto& v : payload.at("value_set")) {
        value_set.insert(v.get<std::string>());
        value_set_ci[to_lower(v.get<std::string>())] = v.get<std::string>();
      }
      json arr = json::array();
      for (const auto& v : payload.at("values")) {
        const std::string raw = v.get<std::string>();
        json entry{{"value", raw}, {"target", nullptr}};
        if (value_set.count(raw)) {
          entry["target"] = raw;
        } else if (auto ci = value_set_ci.find(to_lower(raw)); ci != value_set_ci.end()) {
          entry["target"] = ci->second;
        } else {
          auto it = tables_.taxonomy.find(raw);
          if (it == tables_.taxonomy.end()) {
            for (const auto& [k, tgt] : tables_.taxonomy) {
              if (to_lower(k) == to_lower(raw)) {
                it = tables_.taxonomy.find(k);
                break;
              }
            }
          }
          if (it != tables_.taxonomy.end()) entry["target"] = it->second;
        }
        arr.push_back(std::move(entry));
      }
      return json{{"mappings", arr}};
    }
    case TaskTag::pair_label: {
      const std::string name_attr = payload.value("name_attribute", "name");
      json arr = json::array();
      for (const auto& p : payload.at("pairs")) {
        const std::string key =
            MockTables::pair_key(p.at("dataset_a").get<std::string>(),
                                 p.at("id_a").get<std::string>(),
                                 p.at("dataset_b").get<std::string>(),
                                 p.at("id_b").get<std::string>());
        bool match = tables_.match_pairs.count(key) > 0;
        if (!match && tables_.match_pairs.empty()) {
          // rulebook fallback: near-identical names
          const std::string a = p.at("a").value(name_attr, "");
          const std::string b = p.at("b").value(name_attr, "");
          match = jaro_winkler(to_lower(a), to_lower(b)) >= 0.95;
        }
        arr.push_back(json{{"id_a", p.at("id_a")},
                           {"id_b", p.at("id_b")},
                           {"label", match ? "match" : "non-match"}});
      }
      return json{{"labels", arr}};
    }
    case TaskTag::fusion_select_entities: {
      json selected = json::array();
      for (const auto& g : payload.at("groups")) {
        for (const auto& m : g.at("members")) {
          const std::string token = m.get<std::string>();
          const size_t colon = token.find(':');
          const std::string rid = colon == std::string::npos ? token : token.substr(colon + 1);
          if (tables_.well_known_records.count(rid)) {
            selected.push_back(g.at("cluster_id"));
            break;
          }
        }
      }
      return json{{"selected", selected}};
    }
    case TaskTag::fusion_groundtruth: {
      json values = json::object();
      const std::map<std::string, std::string>* truth = nullptr;
      for (const auto& m : payload.at("members")) {
        const std::string token = m.get<std::string>();
        const size_t colon = token.find(':');
        const std::string rid = colon == std::string::npos ? token : token.substr(colon + 1);
        auto it = tables_.fusion_truth.find(rid);
        if (it != tables_.fusion_truth.end()) {
          truth = &it->second;
          break;
        }
      }
      if (truth) {
        for (const auto& attr : payload.at("attributes")) {
          auto it = truth->find(attr.get<std::string>());
          if (it != truth->end()) values[attr.get<std::string>()] = it->second;
        }
      }
      return json{{"values", values}};
    }
    case TaskTag::embedding:
      break;
  }
  throw OracleError("mock oracle: unsupported task");
}

}  // namespace tabfuse
