#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabfuse/datamodel.hpp"
#include "tabfuse/oracle.hpp"
#include "tabfuse/similarity.hpp"

namespace tabfuse {

enum class MatcherKind { label, instance, oracle, manual };

std::string to_string(MatcherKind m);

struct SchemaCorrespondence {
  std::string source_dataset;
  std::string source_attribute;
  std::string target_attribute;  // never empty: NONE replies are dropped
  double score = 1.0;
  MatcherKind matcher = MatcherKind::manual;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MatchEvaluation {
  std::map<std::string, PrecisionRecall> per_dataset;
  double macro_f1 = 0.0;
};

struct SchemaMatchOptions {
  double label_threshold = 0.8;     // theta_label
  double instance_threshold = 0.3;  // theta_inst
  size_t sample_rows = 5;
  size_t top_values = 5;
};

/// Monge-Elkan over label tokens against every target attribute; argmax pairs
/// above the threshold, then greedy one-to-one by descending score.
std::vector<SchemaCorrespondence> match_labels(const Dataset& source, const TargetSchema& target,
                                               StringMetric inner_metric,
                                               const SchemaMatchOptions& options = {});

/// Runs match_labels with every supported inner metric and keeps the one with
/// the best F1 against gold.
std::vector<SchemaCorrespondence> match_labels_auto(
    const Dataset& source, const TargetSchema& target,
    const std::vector<SchemaCorrespondence>& gold, const SchemaMatchOptions& options = {});

/// TF-IDF cosine between column value documents; the reference dataset plays
/// the target-side column representation.
std::vector<SchemaCorrespondence> match_instances(const Dataset& source,
                                                  const Dataset& target_reference,
                                                  const SchemaMatchOptions& options = {});

/// Single oracle call per source: column names, value summaries, the most
/// complete sample rows and the target schema document.
std::vector<SchemaCorrespondence> match_with_oracle(const Dataset& source,
                                                    const TargetSchema& target, Oracle& oracle,
                                                    const SchemaMatchOptions& options = {});

/// Set-based P/R/F1 on (source_attribute, target_attribute) pairs per
/// dataset; macro average is the unweighted mean of per-dataset F1.
MatchEvaluation evaluate_correspondences(const std::vector<SchemaCorrespondence>& predicted,
                                         const std::vector<SchemaCorrespondence>& gold);

/// Rounds to 3 decimals half-up; mirrors printed-table aggregation.
double round3(double v);

nlohmann::json correspondences_to_json(const std::vector<SchemaCorrespondence>& cs);
std::vector<SchemaCorrespondence> correspondences_from_json(const nlohmann::json& j);
void save_correspondences(const std::vector<SchemaCorrespondence>& cs, const std::string& path);
std::vector<SchemaCorrespondence> load_correspondences(const std::string& path);

/// target attribute -> source attribute for one dataset (one-to-one by construction).
std::map<std::string, std::string> correspondence_map(
    const std::vector<SchemaCorrespondence>& cs, const std::string& dataset);

}  // namespace tabfuse
