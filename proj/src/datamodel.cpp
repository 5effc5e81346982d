#include "tabfuse/datamodel.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "tabfuse/common.hpp"
#include "tabfuse/parsing.hpp"
#include "tabfuse/text.hpp"

namespace tabfuse {

using nlohmann::json;

std::string to_string(DeclaredType t) {
  switch (t) {
    case DeclaredType::string_type: return "string";
    case DeclaredType::number: return "number";
    case DeclaredType::integer: return "integer";
    case DeclaredType::date: return "date";
    case DeclaredType::duration: return "duration";
    case DeclaredType::list: return "list";
    case DeclaredType::categorical: return "categorical";
  }
  return "string";
}

DeclaredType declared_type_from_string(std::string_view s) {
  std::string v = to_lower(s);
  if (v == "string") return DeclaredType::string_type;
  if (v == "number") return DeclaredType::number;
  if (v == "integer") return DeclaredType::integer;
  if (v == "date") return DeclaredType::date;
  if (v == "duration") return DeclaredType::duration;
  if (v == "list") return DeclaredType::list;
  if (v == "categorical") return DeclaredType::categorical;
  throw DataError("unknown declared type: " + std::string(s));
}

std::string to_string(SemanticType t) {
  switch (t) {
    case SemanticType::number: return "number";
    case SemanticType::date: return "date";
    case SemanticType::duration: return "duration";
    case SemanticType::country: return "country";
    case SemanticType::string_type: return "string";
    case SemanticType::list: return "list";
    case SemanticType::categorical: return "categorical";
  }
  return "string";
}

Dataset::Dataset(std::string name, std::vector<AttributeDescriptor> attributes,
                 std::string id_attribute)
    : name_(std::move(name)),
      id_attribute_(std::move(id_attribute)),
      attributes_(std::move(attributes)) {
  for (size_t i = 0; i < attributes_.size(); ++i) {
    auto [it, inserted] = attr_index_.emplace(attributes_[i].name, i);
    if (!inserted) throw DataError("duplicate attribute name: " + attributes_[i].name);
    if (attributes_[i].value_set && attributes_[i].declared_type != DeclaredType::categorical)
      throw DataError("value_set requires categorical type: " + attributes_[i].name);
  }
}

std::optional<size_t> Dataset::attribute_index(std::string_view attr) const {
  auto it = attr_index_.find(std::string(attr));
  if (it == attr_index_.end()) return std::nullopt;
  return it->second;
}

const Value& Dataset::value(const Record& rec, std::string_view attr) const {
  static const Value kNull{};
  auto idx = attribute_index(attr);
  if (!idx) return kNull;
  return rec.values[*idx];
}

const Value& Dataset::value(size_t row, std::string_view attr) const {
  return value(records_[row], attr);
}

void Dataset::add_record(Record rec) {
  if (rec.id.empty()) throw DataError("record id must be non-empty");
  if (rec.values.size() != attributes_.size())
    throw DataError("record " + rec.id + " has " + std::to_string(rec.values.size()) +
                    " values, expected " + std::to_string(attributes_.size()));
  auto [it, inserted] = id_index_.emplace(rec.id, records_.size());
  if (!inserted) throw DataError("duplicate record id: " + rec.id);
  if (rec.source.empty()) rec.source = name_;
  records_.push_back(std::move(rec));
}

const Record* Dataset::find(std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  if (it == id_index_.end()) return nullptr;
  return &records_[it->second];
}

const AttributeDescriptor* TargetSchema::find(std::string_view name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

std::vector<std::string> TargetSchema::data_attribute_names() const {
  std::vector<std::string> out;
  for (const auto& a : attributes)
    if (a.name != id_attribute) out.push_back(a.name);
  return out;
}

namespace {

AttributeDescriptor attribute_from_json(const json& j) {
  AttributeDescriptor a;
  a.name = j.at("name").get<std::string>();
  a.declared_type = declared_type_from_string(j.value("type", "string"));
  a.description = j.value("description", "");
  if (j.contains("value_set") && !j["value_set"].is_null()) {
    a.value_set = j["value_set"].get<std::vector<std::string>>();
  }
  return a;
}

json attribute_to_json(const AttributeDescriptor& a) {
  json j{{"name", a.name}, {"type", to_string(a.declared_type)}};
  if (!a.description.empty()) j["description"] = a.description;
  if (a.value_set) j["value_set"] = *a.value_set;
  return j;
}

}  // namespace

TargetSchema load_target_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open target schema: " + path);
  json j = json::parse(in);
  TargetSchema s;
  s.id_attribute = j.at("id_attribute").get<std::string>();
  for (const auto& ja : j.at("attributes")) s.attributes.push_back(attribute_from_json(ja));
  if (!s.find(s.id_attribute))
    throw DataError("target schema id_attribute not among attributes: " + s.id_attribute);
  return s;
}

void save_target_schema(const TargetSchema& schema, const std::string& path) {
  json j;
  j["id_attribute"] = schema.id_attribute;
  j["attributes"] = json::array();
  for (const auto& a : schema.attributes) j["attributes"].push_back(attribute_to_json(a));
  std::ofstream out(path);
  if (!out) throw DataError("cannot write target schema: " + path);
  out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& path, const std::string& id_attribute,
                     const LoadOptions& options) {
  CsvTable table = read_csv(path, options.delimiter);
  std::string name = std::filesystem::path(path).stem().string();

  std::vector<AttributeDescriptor> attrs;
  attrs.reserve(table.header.size());
  for (const auto& h : table.header) {
    AttributeDescriptor a;
    a.name = h;
    attrs.push_back(std::move(a));
  }

  const bool synthesize = id_attribute == "synthesize";
  std::optional<size_t> id_col;
  std::string effective_id = id_attribute;
  if (synthesize) {
    effective_id = "_id";
    // avoid clashing with a real column
    while (std::any_of(attrs.begin(), attrs.end(),
                       [&](const auto& a) { return a.name == effective_id; }))
      effective_id = "_" + effective_id;
    AttributeDescriptor a;
    a.name = effective_id;
    attrs.insert(attrs.begin(), std::move(a));
  }

  Dataset ds(name, std::move(attrs), effective_id);
  if (!synthesize) {
    id_col = ds.attribute_index(id_attribute);
    if (!id_col) throw DataError("id attribute not in header: " + id_attribute);
  }

  auto is_null_marker = [&](const std::string& cell) {
    if (cell.empty()) return true;
    return std::find(options.null_markers.begin(), options.null_markers.end(), cell) !=
           options.null_markers.end();
  };

  size_t row_index = 0;
  for (const auto& row : table.rows) {
    Record rec;
    rec.source = name;
    rec.values.reserve(ds.attributes().size());
    if (synthesize) rec.values.emplace_back();  // placeholder for the minted id
    for (const auto& cell : row) {
      if (is_null_marker(cell))
        rec.values.emplace_back();
      else
        rec.values.emplace_back(cell);
    }
    if (synthesize) {
      rec.id = name + "-" + std::to_string(row_index);
      rec.values[0] = rec.id;
    } else {
      const Value& v = rec.values[*id_col];
      if (is_null(v)) throw DataError("null id in row " + std::to_string(row_index));
      rec.id = value_to_string(v);
    }
    ds.add_record(std::move(rec));
    ++row_index;
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path, char delimiter) {
  CsvTable t;
  for (const auto& a : dataset.attributes()) t.header.push_back(a.name);
  for (const auto& rec : dataset.records()) {
    std::vector<std::string> row;
    row.reserve(rec.values.size());
    for (const auto& v : rec.values) row.push_back(value_to_string(v));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t, delimiter);
}

namespace {

SemanticType sniff_value(const Value& v, char list_delimiter) {
  if (std::holds_alternative<double>(v)) return SemanticType::number;
  if (std::holds_alternative<Date>(v)) return SemanticType::date;
  if (std::holds_alternative<ListValue>(v)) return SemanticType::list;
  const std::string s = value_to_string(v);
  if (s.find(list_delimiter) != std::string::npos) return SemanticType::list;
  if (parse_number_scaled(s)) return SemanticType::number;
  if (!looks_like_year(s) && parse_date(s)) return SemanticType::date;
  if (s.find(':') != std::string::npos && parse_duration_minutes(s))
    return SemanticType::duration;
  if (country_to_alpha2(s)) return SemanticType::country;
  return SemanticType::string_type;
}

}  // namespace

ColumnProfile profile_column(const Dataset& dataset, const std::string& column,
                             char list_delimiter) {
  auto idx = dataset.attribute_index(column);
  if (!idx) throw DataError("profile: no such column: " + column);

  ColumnProfile p;
  p.column = column;

  size_t nulls = 0;
  std::map<std::string, size_t> distinct;  // ordered for deterministic examples
  std::array<size_t, 7> votes{};
  for (const auto& rec : dataset.records()) {
    const Value& v = rec.values[*idx];
    if (is_null(v)) {
      ++nulls;
      continue;
    }
    votes[static_cast<size_t>(sniff_value(v, list_delimiter))]++;
    auto [it, fresh] = distinct.emplace(value_to_string(v), 0);
    it->second++;
    if (fresh && p.examples.size() < 10) p.examples.push_back(it->first);
  }

  const size_t rows = dataset.row_count();
  p.null_fraction = rows == 0 ? 0.0 : static_cast<double>(nulls) / static_cast<double>(rows);
  p.unique_count = distinct.size();

  const size_t non_null = rows - nulls;
  if (non_null == 0) {
    p.detected_type = SemanticType::string_type;
    p.null_fraction = rows == 0 ? 0.0 : 1.0;
    return p;
  }

  size_t best = static_cast<size_t>(SemanticType::string_type);
  size_t best_votes = 0;
  for (size_t t = 0; t < votes.size(); ++t) {
    if (votes[t] > best_votes) {
      best_votes = votes[t];
      best = t;
    }
  }
  p.detected_type = static_cast<SemanticType>(best);

  // categorical applies to string-majority columns only; numeric columns with
  // few distinct values keep their numeric treatment
  if (p.detected_type == SemanticType::string_type ||
      p.detected_type == SemanticType::country) {
    const size_t threshold =
        std::max<size_t>(20, static_cast<size_t>(0.05 * static_cast<double>(rows)));
    if (p.detected_type == SemanticType::string_type && p.unique_count <= threshold)
      p.detected_type = SemanticType::categorical;
  }
  return p;
}

std::vector<ColumnProfile> profile_dataset(const Dataset& dataset, char list_delimiter) {
  std::vector<ColumnProfile> out;
  out.reserve(dataset.attributes().size());
  for (const auto& a : dataset.attributes())
    out.push_back(profile_column(dataset, a.name, list_delimiter));
  return out;
}

double density(const Dataset& dataset, std::span<const std::string> attribute_set) {
  if (attribute_set.empty()) throw std::invalid_argument("density: empty attribute set");
  if (dataset.row_count() == 0) return 0.0;
  size_t non_null = 0;
  for (const auto& attr : attribute_set) {
    auto idx = dataset.attribute_index(attr);
    if (!idx) continue;  // absent attribute counts as all-null
    for (const auto& rec : dataset.records())
      if (!is_null(rec.values[*idx])) ++non_null;
  }
  return static_cast<double>(non_null) /
         (static_cast<double>(dataset.row_count()) * static_cast<double>(attribute_set.size()));
}

}  // namespace tabfuse
