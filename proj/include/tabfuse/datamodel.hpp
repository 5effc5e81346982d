#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tabfuse/csv.hpp"
#include "tabfuse/value.hpp"

namespace tabfuse {

enum class DeclaredType { string_type, number, integer, date, duration, list, categorical };

std::string to_string(DeclaredType t);
DeclaredType declared_type_from_string(std::string_view s);

/// Semantic type assigned by column profiling.
enum class SemanticType { number, date, duration, country, string_type, list, categorical };

std::string to_string(SemanticType t);

struct AttributeDescriptor {
  std::string name;
  DeclaredType declared_type = DeclaredType::string_type;
  std::string description;
  std::optional<std::vector<std::string>> value_set;  // categorical only
};

struct Record {
  std::string id;
  std::string source;
  std::vector<Value> values;  // aligned with the owning Dataset's attributes
};

/// A loaded source table. Immutable after load by convention: all pipeline
/// steps produce new datasets instead of mutating.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::vector<AttributeDescriptor> attributes,
          std::string id_attribute);

  const std::string& name() const { return name_; }
  const std::string& id_attribute() const { return id_attribute_; }
  const std::vector<AttributeDescriptor>& attributes() const { return attributes_; }
  const std::vector<Record>& records() const { return records_; }
  size_t row_count() const { return records_.size(); }

  std::optional<size_t> attribute_index(std::string_view attr) const;

  /// Null for attributes the dataset does not carry.
  const Value& value(const Record& rec, std::string_view attr) const;
  const Value& value(size_t row, std::string_view attr) const;

  /// Enforces id uniqueness and the one-slot-per-attribute invariant.
  void add_record(Record rec);

  const Record* find(std::string_view id) const;

 private:
  std::string name_;
  std::string id_attribute_;
  std::vector<AttributeDescriptor> attributes_;
  std::vector<Record> records_;
  std::unordered_map<std::string, size_t> attr_index_;
  std::unordered_map<std::string, size_t> id_index_;
};

struct TargetSchema {
  std::vector<AttributeDescriptor> attributes;
  std::string id_attribute;

  const AttributeDescriptor* find(std::string_view name) const;
  /// All attributes except the id attribute, in schema order.
  std::vector<std::string> data_attribute_names() const;
};

TargetSchema load_target_schema(const std::string& path);
void save_target_schema(const TargetSchema& schema, const std::string& path);

struct ColumnProfile {
  std::string column;
  SemanticType detected_type = SemanticType::string_type;
  size_t unique_count = 0;
  double null_fraction = 0.0;
  std::vector<std::string> examples;  // <= 10 non-null samples
};

struct LoadOptions {
  char delimiter = ',';
  /// Cells equal to any of these markers load as null; "" is always null.
  std::vector<std::string> null_markers = {"null", "NULL", "NaN", "-"};
  char list_delimiter = '|';
};

/// Loads a delimiter-separated file with a header row. id_attribute may be
/// "synthesize" to mint "<dataset>-<row index>" ids. Rejects duplicate header
/// names and duplicate ids.
Dataset load_dataset(const std::string& path, const std::string& id_attribute,
                     const LoadOptions& options = {});

/// Serializes with canonical value formatting; load(save(d)) round-trips
/// record count, ids and null positions.
void save_dataset(const Dataset& dataset, const std::string& path, char delimiter = ',');

/// Majority vote over per-value type sniffers; string-majority columns with
/// few distinct values (<= max(20, 5% of rows)) become categorical.
ColumnProfile profile_column(const Dataset& dataset, const std::string& column,
                             char list_delimiter = '|');

std::vector<ColumnProfile> profile_dataset(const Dataset& dataset, char list_delimiter = '|');

/// Non-null cells over rows * |attribute_set|; attributes absent from the
/// dataset count as all-null. Empty dataset -> 0.
double density(const Dataset& dataset, std::span<const std::string> attribute_set);

}  // namespace tabfuse
