#include "tabfuse/normalization.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "tabfuse/text.hpp"

namespace tabfuse {

using nlohmann::json;

std::string to_string(NormalizerKind k) {
  switch (k) {
    case NormalizerKind::numeric_scale: return "numeric_scale";
    case NormalizerKind::date: return "date";
    case NormalizerKind::duration: return "duration";
    case NormalizerKind::country: return "country";
    case NormalizerKind::phone_like_passthrough: return "phone_like_passthrough";
    case NormalizerKind::list_split: return "list_split";
    case NormalizerKind::none: return "none";
    case NormalizerKind::taxonomy: return "taxonomy";
  }
  return "none";
}

NormalizationCounts NormalizationReport::code_total() const {
  NormalizationCounts t;
  for (const auto& [_, c] : code_based) {
    t.columns_touched += c.columns_touched;
    t.values_normalized += c.values_normalized;
    t.values_total += c.values_total;
  }
  return t;
}

NormalizationCounts NormalizationReport::taxonomy_total() const {
  NormalizationCounts t;
  for (const auto& [_, c] : taxonomy_based) {
    t.columns_touched += c.columns_touched;
    t.values_normalized += c.values_normalized;
    t.values_total += c.values_total;
  }
  return t;
}

json NormalizationReport::to_json() const {
  auto counts_json = [](const NormalizationCounts& c) {
    return json{{"columns", c.columns_touched},
                {"normalized", c.values_normalized},
                {"total", c.values_total}};
  };
  json code = json::object(), tax = json::object();
  for (const auto& [ds, c] : code_based) code[ds] = counts_json(c);
  for (const auto& [ds, c] : taxonomy_based) tax[ds] = counts_json(c);
  return json{{"code_based", code},
              {"taxonomy", tax},
              {"code_based_total", counts_json(code_total())},
              {"taxonomy_total", counts_json(taxonomy_total())}};
}

std::vector<NormalizerAssignment> assign_normalizers(
    const std::vector<ColumnProfile>& profiles,
    const std::vector<SchemaCorrespondence>& correspondences, const TargetSchema& target,
    const std::string& dataset_name) {
  // source column -> target attribute for this dataset
  std::map<std::string, std::string> mapped;
  for (const auto& c : correspondences)
    if (c.source_dataset == dataset_name) mapped[c.source_attribute] = c.target_attribute;

  std::vector<NormalizerAssignment> out;
  for (const auto& profile : profiles) {
    NormalizerAssignment a;
    a.dataset = dataset_name;
    a.column = profile.column;
    auto it = mapped.find(profile.column);
    if (it == mapped.end()) {
      a.normalizer = NormalizerKind::none;
      out.push_back(std::move(a));
      continue;
    }
    const AttributeDescriptor* tgt = target.find(it->second);
    a.target_attribute = it->second;
    a.target_type = tgt ? tgt->declared_type : DeclaredType::string_type;

    if (tgt && tgt->value_set) {
      a.normalizer = NormalizerKind::taxonomy;
    } else if (a.target_type == DeclaredType::number || a.target_type == DeclaredType::integer) {
      // a date-profiled source feeding a numeric target is reduced via its year
      a.normalizer = profile.detected_type == SemanticType::date ? NormalizerKind::date
                                                                 : NormalizerKind::numeric_scale;
    } else if (a.target_type == DeclaredType::date) {
      a.normalizer = NormalizerKind::date;
    } else if (a.target_type == DeclaredType::duration) {
      a.normalizer = NormalizerKind::duration;
    } else if (a.target_type == DeclaredType::list) {
      a.normalizer = NormalizerKind::list_split;
    } else {
      switch (profile.detected_type) {
        case SemanticType::country: a.normalizer = NormalizerKind::country; break;
        case SemanticType::date: a.normalizer = NormalizerKind::date; break;
        case SemanticType::duration: a.normalizer = NormalizerKind::duration; break;
        case SemanticType::list: a.normalizer = NormalizerKind::list_split; break;
        default: a.normalizer = NormalizerKind::none; break;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::optional<Value> normalize_value(const std::string& raw, NormalizerKind normalizer,
                                     DeclaredType target_type,
                                     const NormalizationOptions& options) {
  switch (normalizer) {
    case NormalizerKind::numeric_scale: {
      auto v = parse_number_scaled(raw, options.number_format);
      if (!v) return std::nullopt;
      if (target_type == DeclaredType::integer) return Value{std::floor(*v + 0.5)};
      return Value{*v};
    }
    case NormalizerKind::date: {
      auto d = parse_date(raw);
      if (!d) return std::nullopt;
      if (target_type == DeclaredType::number || target_type == DeclaredType::integer)
        return Value{static_cast<double>(d->year)};
      return Value{*d};
    }
    case NormalizerKind::duration: {
      auto m = parse_duration_minutes(raw);
      if (!m) return std::nullopt;
      return Value{*m};
    }
    case NormalizerKind::country: {
      auto c = country_to_alpha2(raw);
      if (!c) return std::nullopt;
      return Value{*c};
    }
    case NormalizerKind::phone_like_passthrough:
      return Value{raw};
    case NormalizerKind::list_split: {
      ListValue items;
      for (auto& part : split(raw, options.list_delimiter)) {
        std::string t = trim(part);
        if (!t.empty()) items.push_back(std::move(t));
      }
      return Value{std::move(items)};
    }
    case NormalizerKind::none:
    case NormalizerKind::taxonomy:
      return Value{raw};
  }
  return std::nullopt;
}

TaxonomyMapping map_taxonomy(const Dataset& dataset, const std::string& column,
                             const AttributeDescriptor& target_attribute, Oracle& oracle,
                             const NormalizationOptions& options) {
  if (!target_attribute.value_set)
    throw ConfigError("map_taxonomy: target attribute " + target_attribute.name +
                      " has no value set");
  auto idx = dataset.attribute_index(column);
  if (!idx) throw DataError("map_taxonomy: no such column: " + column);

  std::set<std::string> distinct;
  for (const auto& rec : dataset.records()) {
    const Value& v = rec.values[*idx];
    if (!is_null(v)) distinct.insert(value_to_string(v));
  }

  const std::set<std::string> value_set(target_attribute.value_set->begin(),
                                        target_attribute.value_set->end());

  TaxonomyMapping mapping;
  mapping.dataset = dataset.name();
  mapping.column = column;
  mapping.target_attribute = target_attribute.name;

  std::vector<std::string> batch;
  auto flush = [&] {
    if (batch.empty()) return;
    json payload{{"dataset", dataset.name()},
                 {"column", column},
                 {"target_attribute", target_attribute.name},
                 {"values", batch},
                 {"value_set", *target_attribute.value_set}};
    OracleRequest req;
    req.task_tag = TaskTag::taxonomy_map;
    req.system_text =
        "You map raw categorical values onto a closed target taxonomy, resolving "
        "synonyms, abbreviations and sub-concepts.";
    req.user_text = compose_user_text(
        "Map every raw value to exactly one member of the target value set, or to "
        "null when no suitable entry exists (the raw value is then retained).",
        payload);
    req.response_contract.description =
        R"({"mappings": [{"value": string, "target": string or null}]})";
    req.response_contract.shape = ResponseContract::Shape::object;
    req.response_contract.required_keys = {"mappings"};

    json reply = oracle.invoke(req);
    std::map<std::string, std::string> replied;
    for (const auto& m : reply.at("mappings")) {
      if (!m.contains("value")) continue;
      const std::string raw = m["value"].get<std::string>();
      if (!m.contains("target") || m["target"].is_null()) continue;  // RETAIN
      const std::string tgt = m["target"].get<std::string>();
      if (!value_set.count(tgt)) {
        std::cerr << "warning: taxonomy target '" << tgt << "' for '" << raw
                  << "' is outside the value set; retaining raw value\n";
        continue;
      }
      replied[raw] = tgt;
    }
    for (const auto& raw : batch) {
      auto it = replied.find(raw);
      if (it != replied.end()) mapping.entries[raw] = it->second;
    }
    batch.clear();
  };

  for (const auto& raw : distinct) {
    batch.push_back(raw);
    if (batch.size() >= options.taxonomy_batch) flush();
  }
  flush();
  return mapping;
}

std::pair<Dataset, NormalizationReport> apply_normalization(
    const Dataset& dataset, const std::vector<NormalizerAssignment>& assignments,
    const std::vector<TaxonomyMapping>& mappings, const NormalizationOptions& options) {
  // column index -> plan
  struct Plan {
    NormalizerKind kind = NormalizerKind::none;
    DeclaredType target_type = DeclaredType::string_type;
    const TaxonomyMapping* mapping = nullptr;
  };
  std::map<size_t, Plan> plans;
  for (const auto& a : assignments) {
    if (a.dataset != dataset.name()) continue;
    auto idx = dataset.attribute_index(a.column);
    if (!idx) throw DataError("apply_normalization: no such column: " + a.column);
    if (a.normalizer == NormalizerKind::none) continue;
    Plan p;
    p.kind = a.normalizer;
    p.target_type = a.target_type;
    if (a.normalizer == NormalizerKind::taxonomy) {
      for (const auto& m : mappings)
        if (m.dataset == dataset.name() && m.column == a.column) p.mapping = &m;
      if (!p.mapping) continue;  // no mapping produced; leave column untouched
    }
    plans[*idx] = p;
  }

  Dataset out(dataset.name(), dataset.attributes(), dataset.id_attribute());
  NormalizationCounts code, tax;
  std::set<size_t> code_cols, tax_cols;

  for (const auto& rec : dataset.records()) {
    Record copy;
    copy.id = rec.id;
    copy.source = rec.source;
    copy.values = rec.values;
    for (const auto& [col, plan] : plans) {
      Value& v = copy.values[col];
      if (is_null(v)) continue;
      const std::string raw = value_to_string(v);
      if (plan.kind == NormalizerKind::taxonomy) {
        ++tax.values_total;
        tax_cols.insert(col);
        auto it = plan.mapping->entries.find(raw);
        if (it != plan.mapping->entries.end()) {
          v = it->second;
          ++tax.values_normalized;  // explicit mapping counts even when identical
        }
        // RETAIN: raw value kept, not counted as normalized
      } else {
        ++code.values_total;
        code_cols.insert(col);
        auto normalized = normalize_value(raw, plan.kind, plan.target_type, options);
        if (normalized) {
          if (plan.kind != NormalizerKind::phone_like_passthrough || *normalized != v)
            ++code.values_normalized;
          v = std::move(*normalized);
        }
        // UNPARSED: raw value kept, counted as not normalized
      }
    }
    out.add_record(std::move(copy));
  }

  code.columns_touched = code_cols.size();
  tax.columns_touched = tax_cols.size();
  NormalizationReport report;
  if (code.values_total > 0 || code.columns_touched > 0) report.code_based[dataset.name()] = code;
  if (tax.values_total > 0 || tax.columns_touched > 0) report.taxonomy_based[dataset.name()] = tax;
  return {std::move(out), std::move(report)};
}

json taxonomy_to_json(const std::vector<TaxonomyMapping>& mappings) {
  json arr = json::array();
  for (const auto& m : mappings) {
    json entries = json::object();
    for (const auto& [raw, tgt] : m.entries) entries[raw] = tgt;
    arr.push_back(json{{"dataset", m.dataset},
                       {"column", m.column},
                       {"target_attribute", m.target_attribute},
                       {"entries", entries}});
  }
  return arr;
}

std::vector<TaxonomyMapping> taxonomy_from_json(const json& arr) {
  std::vector<TaxonomyMapping> out;
  for (const auto& j : arr) {
    TaxonomyMapping m;
    m.dataset = j.at("dataset").get<std::string>();
    m.column = j.at("column").get<std::string>();
    m.target_attribute = j.value("target_attribute", "");
    for (const auto& [raw, tgt] : j.at("entries").items()) m.entries[raw] = tgt.get<std::string>();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace tabfuse
