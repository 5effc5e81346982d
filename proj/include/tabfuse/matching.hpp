#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tabfuse/blocking.hpp"
#include "tabfuse/datamodel.hpp"
#include "tabfuse/learners.hpp"
#include "tabfuse/oracle.hpp"
#include "tabfuse/schema_matching.hpp"

namespace tabfuse {

enum class PairLabel { match, non_match };
enum class LabelSource { oracle_seed, oracle_active, oracle_random, gold };

std::string to_string(PairLabel l);
std::string to_string(LabelSource s);

struct LabeledPair {
  CandidatePair pair;
  PairLabel label = PairLabel::non_match;
  LabelSource source = LabelSource::gold;
};

struct RecordCorrespondence {
  RecordRef a;
  RecordRef b;
  double score = 0.0;
};

/// Fixed feature layout for one dataset pair: per shared target attribute a
/// datatype-dependent metric block, plus the overall embedding cosine last.
struct FeatureSchema {
  struct Entry {
    std::string target_attribute;
    std::string metric;
  };
  std::vector<Entry> entries;
  size_t size() const { return entries.size() + 1; }  // + embedding cosine
};

constexpr double kMissingFeature = -1.0;

/// Computes feature vectors for candidate pairs of one dataset pair. Values
/// missing on either side become the -1 sentinel.
class FeatureExtractor {
 public:
  FeatureExtractor(const Dataset& a, const Dataset& b, const TargetSchema& target,
                   const std::vector<SchemaCorrespondence>& correspondences);

  const FeatureSchema& schema() const { return schema_; }
  Eigen::VectorXd features(const CandidatePair& pair) const;
  Eigen::MatrixXd matrix(const std::vector<CandidatePair>& pool) const;

 private:
  const Dataset& a_;
  const Dataset& b_;
  FeatureSchema schema_;
  // per schema entry: attribute column index on each side (or npos)
  std::vector<std::pair<size_t, size_t>> columns_;
  std::vector<DeclaredType> types_;
};

/// Batched oracle pair labeling for one dataset pair; prompts carry the
/// records' schema-mapped values.
class PairLabeler {
 public:
  PairLabeler(const Dataset& a, const Dataset& b, const TargetSchema& target,
              const std::vector<SchemaCorrespondence>& correspondences, Oracle& oracle,
              size_t request_batch = 20);

  std::vector<PairLabel> label(const std::vector<CandidatePair>& pairs);
  size_t labels_issued() const { return labels_issued_; }

 private:
  const Dataset& a_;
  const Dataset& b_;
  const TargetSchema& target_;
  std::map<std::string, std::string> map_a_, map_b_;  // target attr -> source attr
  Oracle& oracle_;
  size_t request_batch_;
  size_t labels_issued_ = 0;
  std::string name_attribute_;
};

struct SeedOptions {
  size_t target_seed_count = 100;
  int per_query_bottom = 2;
  size_t label_budget = SIZE_MAX;  // total oracle labels allowed
};

struct SeedResult {
  std::vector<LabeledPair> seeds;
  bool budget_exhausted = false;
};

/// Walks query records in order of their best candidate similarity; per query
/// labels candidates by descending similarity until >=1 match and >=2
/// non-match are found (or candidates run out), then labels the query's
/// lowest-similarity candidates. Stops when the seed target or the labeling
/// budget is reached.
SeedResult seed_labeling(const std::vector<CandidatePair>& pool, PairLabeler& labeler,
                         const SeedOptions& options);

/// Top-n unlabeled pairs by population variance of the scorers' probability
/// outputs; deterministic ties by (id_a, id_b). Returns indexes into
/// `unlabeled`.
std::vector<size_t> select_disagreement_batch(const std::vector<CandidatePair>& unlabeled,
                                              const Eigen::MatrixXd& features,
                                              const std::vector<const Scorer*>& scorers,
                                              size_t n);

struct ActiveLearningOptions {
  size_t batch_size = 100;
  size_t target_size = 600;
  size_t label_budget = SIZE_MAX;  // seeds + active + random labels together
  double augment_fraction = 0.2;
  std::vector<LearnerSpec> committee;
  TrainOptions train;
  std::uint64_t seed = 0;
  bool retune_every_round = false;  // tune hyperparameters once, reuse after
};

struct TrainingSets {
  std::vector<LabeledPair> core;
  std::vector<LabeledPair> augmented;  // core + 20% random pool pairs
  size_t rounds = 0;
  size_t oracle_labels_used = 0;  // includes the seeds
  bool budget_exhausted = false;
};

/// Committee-disagreement active learning on top of the seed set, then the
/// random 20% augmentation variant. Both sets carry oracle labels.
TrainingSets run_active_learning(const std::vector<CandidatePair>& pool,
                                 const FeatureExtractor& extractor, PairLabeler& labeler,
                                 const SeedResult& seeds, const ActiveLearningOptions& options);

/// 200 pool pairs, half from the top similarity decile and half uniform,
/// oracle-labeled, excluding pairs already in the training sets.
std::vector<LabeledPair> sample_validation_pairs(const std::vector<CandidatePair>& pool,
                                                 const std::set<std::string>& exclude_keys,
                                                 size_t size, std::uint64_t seed,
                                                 PairLabeler& labeler);

struct MatcherModel {
  std::shared_ptr<const Scorer> scorer;
  LearnerSpec spec;
  double threshold = 0.5;
  std::string training_variant;  // "core" or "core+random-augmented"
  double validation_f1 = 0.0;

  nlohmann::json to_json() const;
};

MatcherModel load_matcher_model(const nlohmann::json& j);

struct ModelSelectOptions {
  double threshold_grid_start = 0.05;
  double threshold_grid_end = 0.95;
  double threshold_grid_step = 0.05;
  std::vector<LearnerSpec> committee;
  TrainOptions train;
};

/// Trains the committee on both training-set variants and picks the
/// (variant, member, threshold) with best validation F1. Ties prefer the
/// higher threshold, then family/member name order.
MatcherModel select_model(const TrainingSets& sets, const FeatureExtractor& extractor,
                          const std::vector<LabeledPair>& validation,
                          const ModelSelectOptions& options);

/// Pairs scoring at or above the model threshold, scores retained.
std::vector<RecordCorrespondence> predict(const MatcherModel& model,
                                          const std::vector<CandidatePair>& pool,
                                          const Eigen::MatrixXd& features);

/// P/R/F1 restricted to gold-test pairs; pairs absent from the predictions
/// count as non-match predictions.
PrecisionRecall evaluate_matching(const std::vector<RecordCorrespondence>& predicted,
                                  const std::vector<LabeledPair>& gold_test);

std::string pair_cache_key(const CandidatePair& p);

void save_labeled_pairs(const std::vector<LabeledPair>& pairs, const std::string& path);
std::vector<LabeledPair> load_labeled_pairs(const std::string& path, const std::string& dataset_a,
                                            const std::string& dataset_b);

}  // namespace tabfuse
