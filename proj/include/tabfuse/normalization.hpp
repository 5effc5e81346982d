#pragma once

#include <map>
#include <string>
#include <vector>

#include "tabfuse/datamodel.hpp"
#include "tabfuse/oracle.hpp"
#include "tabfuse/parsing.hpp"
#include "tabfuse/schema_matching.hpp"

namespace tabfuse {

enum class NormalizerKind {
  numeric_scale,
  date,
  duration,
  country,
  phone_like_passthrough,
  list_split,
  none,
  taxonomy,  // handled by oracle mappings rather than code
};

std::string to_string(NormalizerKind k);

struct NormalizerAssignment {
  std::string dataset;
  std::string column;
  NormalizerKind normalizer = NormalizerKind::none;
  DeclaredType target_type = DeclaredType::string_type;
  std::string target_attribute;
};

/// Per-column raw-value mapping onto a target value set. Missing entries and
/// null targets mean RETAIN: the raw value is kept unchanged.
struct TaxonomyMapping {
  std::string dataset;
  std::string column;
  std::string target_attribute;
  std::map<std::string, std::string> entries;  // raw -> target; absent = RETAIN

  bool is_retained(const std::string& raw) const { return entries.find(raw) == entries.end(); }
};

struct NormalizationCounts {
  size_t columns_touched = 0;
  size_t values_normalized = 0;
  size_t values_total = 0;
};

struct NormalizationReport {
  // dataset -> counts, split by method
  std::map<std::string, NormalizationCounts> code_based;
  std::map<std::string, NormalizationCounts> taxonomy_based;

  NormalizationCounts code_total() const;
  NormalizationCounts taxonomy_total() const;
  nlohmann::json to_json() const;
};

struct NormalizationOptions {
  NumberFormat number_format;
  char list_delimiter = '|';
  size_t taxonomy_batch = 200;  // distinct values per oracle request
};

/// One assignment per schema-mapped column; categorical targets with a value
/// set get taxonomy treatment, everything unmapped gets none.
std::vector<NormalizerAssignment> assign_normalizers(
    const std::vector<ColumnProfile>& profiles,
    const std::vector<SchemaCorrespondence>& correspondences, const TargetSchema& target,
    const std::string& dataset_name);

/// UNPARSED is encoded as nullopt: the caller keeps the raw value and counts
/// the cell as not normalized.
std::optional<Value> normalize_value(const std::string& raw, NormalizerKind normalizer,
                                     DeclaredType target_type,
                                     const NormalizationOptions& options = {});

/// Oracle-backed mapping of the column's distinct values onto the target
/// attribute's value set; every distinct raw value appears exactly once.
TaxonomyMapping map_taxonomy(const Dataset& dataset, const std::string& column,
                             const AttributeDescriptor& target_attribute, Oracle& oracle,
                             const NormalizationOptions& options = {});

/// Applies code normalizers and taxonomy mappings; untouched columns are
/// copied verbatim. Returns the rewritten dataset and per-method accounting.
std::pair<Dataset, NormalizationReport> apply_normalization(
    const Dataset& dataset, const std::vector<NormalizerAssignment>& assignments,
    const std::vector<TaxonomyMapping>& mappings, const NormalizationOptions& options = {});

nlohmann::json taxonomy_to_json(const std::vector<TaxonomyMapping>& mappings);
std::vector<TaxonomyMapping> taxonomy_from_json(const nlohmann::json& j);

}  // namespace tabfuse
