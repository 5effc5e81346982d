#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace tabfuse {

enum class LearnerFamily { regularized_linear, bagged_trees, boosted_trees };

std::string to_string(LearnerFamily f);
LearnerFamily learner_family_from_string(const std::string& s);

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::regularized_linear;
  std::map<std::string, double> hyper;
  std::uint64_t seed = 0;
  std::string name;  // committee-member label, also the model-selection tie-break
};

/// Five members spanning all three families; seeds derive from the run seed.
std::vector<LearnerSpec> default_committee(std::uint64_t seed);

/// A trained binary scorer producing a match probability.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
  virtual std::string family_name() const = 0;

  Eigen::VectorXd score_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

std::unique_ptr<Scorer> scorer_from_json(const nlohmann::json& j);

struct TrainOptions {
  int cv_folds = 3;
  int search_budget = 6;  // hyperparameter draws per member
  bool class_weighting = true;
};

/// Trains with the spec's hyperparameters as-is. Throws DataError on
/// single-class labels.
std::unique_ptr<Scorer> train_scorer(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                     const LearnerSpec& spec,
                                     const TrainOptions& options = {});

struct TunedScorer {
  std::unique_ptr<Scorer> scorer;
  LearnerSpec tuned_spec;
  double cv_f1 = 0.0;
};

/// Seeded randomized search over the family's hyperparameter space; keeps the
/// draw with the best cross-validated F1 and refits it on all data.
TunedScorer tune_and_train(const Eigen::MatrixXd& X, const std::vector<int>& y,
                           const LearnerSpec& spec, const TrainOptions& options = {});

/// F1 of binary predictions at a threshold against 0/1 labels.
double f1_score(const std::vector<int>& truth, const Eigen::VectorXd& scores, double threshold);

}  // namespace tabfuse
