#include "tabfuse/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tabfuse/common.hpp"

namespace tabfuse {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

std::string to_string(LearnerFamily f) {
  switch (f) {
    case LearnerFamily::regularized_linear: return "regularized-linear";
    case LearnerFamily::bagged_trees: return "bagged-trees";
    case LearnerFamily::boosted_trees: return "boosted-trees";
  }
  return "regularized-linear";
}

LearnerFamily learner_family_from_string(const std::string& s) {
  if (s == "regularized-linear") return LearnerFamily::regularized_linear;
  if (s == "bagged-trees") return LearnerFamily::bagged_trees;
  if (s == "boosted-trees") return LearnerFamily::boosted_trees;
  throw ConfigError("unknown learner family: " + s);
}

std::vector<LearnerSpec> default_committee(std::uint64_t seed) {
  std::vector<LearnerSpec> specs(5);
  specs[0] = {LearnerFamily::regularized_linear, {}, seed * 31 + 1, "linear-a"};
  specs[1] = {LearnerFamily::bagged_trees, {{"max_depth", 8}}, seed * 31 + 2, "bagged-a"};
  specs[2] = {LearnerFamily::bagged_trees, {{"max_depth", 12}}, seed * 31 + 3, "bagged-b"};
  specs[3] = {LearnerFamily::boosted_trees, {{"learning_rate", 0.1}}, seed * 31 + 4, "boosted-a"};
  specs[4] = {LearnerFamily::boosted_trees, {{"learning_rate", 0.05}}, seed * 31 + 5, "boosted-b"};
  return specs;
}

VectorXd Scorer::score_matrix(const Eigen::Ref<const MatrixXd>& X) const {
  VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = score(X.row(i));
  return out;
}

double f1_score(const std::vector<int>& truth, const VectorXd& scores, double threshold) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const bool pred = scores[static_cast<Eigen::Index>(i)] >= threshold;
    if (pred && truth[i] == 1) ++tp;
    else if (pred && truth[i] == 0) ++fp;
    else if (!pred && truth[i] == 1) ++fn;
  }
  if (tp == 0) return 0.0;
  const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * p * r / (p + r);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

VectorXd class_weights(const std::vector<int>& y, bool enabled) {
  VectorXd w = VectorXd::Ones(static_cast<Eigen::Index>(y.size()));
  if (!enabled) return w;
  const double n = static_cast<double>(y.size());
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double neg = n - pos;
  const double wp = n / (2.0 * pos);
  const double wn = n / (2.0 * neg);
  for (size_t i = 0; i < y.size(); ++i) w[static_cast<Eigen::Index>(i)] = y[i] == 1 ? wp : wn;
  return w;
}

// ---------------------------------------------------------------------------
// Regularized logistic regression (full-batch gradient descent on
// standardized features)

class LogisticScorer : public Scorer {
 public:
  LogisticScorer() = default;
  LogisticScorer(VectorXd weights, double bias, VectorXd mean, VectorXd scale)
      : w_(std::move(weights)), b_(bias), mean_(std::move(mean)), scale_(std::move(scale)) {}

  double score(const Eigen::Ref<const VectorXd>& x) const override {
    double z = b_;
    for (Eigen::Index j = 0; j < w_.size(); ++j)
      z += w_[j] * ((x[j] - mean_[j]) / scale_[j]);
    return sigmoid(z);
  }

  std::string family_name() const override { return "regularized-linear"; }

  json to_json() const override {
    auto vec = [](const VectorXd& v) {
      json a = json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
      return a;
    };
    return json{{"kind", "logistic"},
                {"weights", vec(w_)},
                {"bias", b_},
                {"mean", vec(mean_)},
                {"scale", vec(scale_)}};
  }

  static std::unique_ptr<Scorer> from_json(const json& j) {
    auto vec = [](const json& a) {
      VectorXd v(a.size());
      for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
      return v;
    };
    return std::make_unique<LogisticScorer>(vec(j.at("weights")), j.at("bias").get<double>(),
                                            vec(j.at("mean")), vec(j.at("scale")));
  }

 private:
  VectorXd w_;
  double b_ = 0.0;
  VectorXd mean_, scale_;
};

std::unique_ptr<Scorer> train_logistic(const MatrixXd& X, const std::vector<int>& y,
                                       const VectorXd& sample_weight, double lambda, double lr,
                                       int iters) {
  const Eigen::Index n = X.rows(), d = X.cols();
  VectorXd mean = X.colwise().mean();
  VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (X.col(j).array() - mean[j]).square().sum() / static_cast<double>(n);
    scale[j] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  MatrixXd Z = (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();

  VectorXd target(n), w = VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) target[i] = y[static_cast<size_t>(i)];
  double b = 0.0;
  const double wsum = sample_weight.sum();
  for (int it = 0; it < iters; ++it) {
    VectorXd p = (Z * w).array() + b;
    p = p.unaryExpr([](double z) { return sigmoid(z); });
    VectorXd err = (p - target).cwiseProduct(sample_weight);
    VectorXd grad_w = Z.transpose() * err / wsum + lambda * w;
    const double grad_b = err.sum() / wsum;
    w -= lr * grad_w;
    b -= lr * grad_b;
  }
  return std::make_unique<LogisticScorer>(std::move(w), b, std::move(mean), std::move(scale));
}

// ---------------------------------------------------------------------------
// CART trees: classification (weighted gini) and regression (weighted MSE)

struct TreeNode {
  int feature = -1;  // -1: leaf
  double threshold = 0.0;
  double value = 0.0;  // leaf payload: probability or regression value
  int left = -1, right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const Eigen::Ref<const VectorXd>& x) const {
    int i = 0;
    while (nodes[static_cast<size_t>(i)].feature >= 0) {
      const auto& nd = nodes[static_cast<size_t>(i)];
      i = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<size_t>(i)].value;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& nd : nodes)
      arr.push_back(json{{"f", nd.feature},
                         {"t", nd.threshold},
                         {"v", nd.value},
                         {"l", nd.left},
                         {"r", nd.right}});
    return arr;
  }

  static Tree from_json(const json& arr) {
    Tree t;
    for (const auto& j : arr)
      t.nodes.push_back({j.at("f").get<int>(), j.at("t").get<double>(), j.at("v").get<double>(),
                         j.at("l").get<int>(), j.at("r").get<int>()});
    return t;
  }
};

struct TreeParams {
  int max_depth = 8;
  double min_leaf_weight = 1.0;
  int mtry = 0;  // 0: all features
  bool regression = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& X, const VectorXd& target, const VectorXd& weight,
              const TreeParams& params, std::mt19937_64& rng)
      : X_(X), target_(target), weight_(weight), params_(params), rng_(rng) {}

  Tree build(const std::vector<int>& rows) {
    Tree tree;
    grow(rows, 0, tree);
    return tree;
  }

 private:
  int grow(const std::vector<int>& rows, int depth, Tree& tree) {
    double wsum = 0.0, tsum = 0.0;
    for (int r : rows) {
      wsum += weight_[r];
      tsum += weight_[r] * target_[r];
    }
    const double mean = wsum > 0.0 ? tsum / wsum : 0.0;

    const int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().value = mean;

    if (depth >= params_.max_depth || rows.size() < 2 || wsum <= params_.min_leaf_weight)
      return node_index;

    int best_feature = -1;
    double best_threshold = 0.0, best_gain = 1e-12;
    const auto features = candidate_features();
    for (int f : features) find_best_split(rows, f, mean, wsum, best_feature, best_threshold,
                                           best_gain);
    if (best_feature < 0) return node_index;

    std::vector<int> left, right;
    for (int r : rows) {
      (X_(r, best_feature) <= best_threshold ? left : right).push_back(r);
    }
    if (left.empty() || right.empty()) return node_index;

    tree.nodes[static_cast<size_t>(node_index)].feature = best_feature;
    tree.nodes[static_cast<size_t>(node_index)].threshold = best_threshold;
    const int l = grow(left, depth + 1, tree);
    const int r = grow(right, depth + 1, tree);
    tree.nodes[static_cast<size_t>(node_index)].left = l;
    tree.nodes[static_cast<size_t>(node_index)].right = r;
    return node_index;
  }

  std::vector<int> candidate_features() {
    const int d = static_cast<int>(X_.cols());
    std::vector<int> all(static_cast<size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    if (params_.mtry <= 0 || params_.mtry >= d) return all;
    // deterministic subset per node
    for (int i = 0; i < params_.mtry; ++i) {
      std::uniform_int_distribution<int> dist(i, d - 1);
      std::swap(all[static_cast<size_t>(i)], all[static_cast<size_t>(dist(rng_))]);
    }
    all.resize(static_cast<size_t>(params_.mtry));
    std::sort(all.begin(), all.end());
    return all;
  }

  // impurity: weighted variance; for 0/1 targets this is the gini split
  // criterion up to a constant factor
  void find_best_split(const std::vector<int>& rows, int f, double parent_mean,
                       double parent_weight, int& best_feature, double& best_threshold,
                       double& best_gain) {
    std::vector<int> order = rows;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (X_(a, f) != X_(b, f)) return X_(a, f) < X_(b, f);
      return a < b;
    });
    double lw = 0.0, ls = 0.0;
    const double total_sum = parent_mean * parent_weight;
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      const int r = order[i];
      lw += weight_[r];
      ls += weight_[r] * target_[r];
      const double x0 = X_(r, f), x1 = X_(order[i + 1], f);
      if (x0 == x1) continue;
      const double rw = parent_weight - lw;
      if (lw < params_.min_leaf_weight || rw < params_.min_leaf_weight) continue;
      const double rs = total_sum - ls;
      // gain = sum w*(t - parent_mean)^2 - [left + right residual]; the
      // constant parent term cancels, so compare -(ls^2/lw + rs^2/rw)
      const double gain = ls * ls / lw + rs * rs / rw - total_sum * total_sum / parent_weight;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = (x0 + x1) / 2.0;
      }
    }
  }

  const MatrixXd& X_;
  const VectorXd& target_;
  const VectorXd& weight_;
  TreeParams params_;
  std::mt19937_64& rng_;
};

// ---------------------------------------------------------------------------
// Bagged trees

class BaggedTreesScorer : public Scorer {
 public:
  explicit BaggedTreesScorer(std::vector<Tree> trees) : trees_(std::move(trees)) {}

  double score(const Eigen::Ref<const VectorXd>& x) const override {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }

  std::string family_name() const override { return "bagged-trees"; }

  json to_json() const override {
    json arr = json::array();
    for (const auto& t : trees_) arr.push_back(t.to_json());
    return json{{"kind", "bagged"}, {"trees", arr}};
  }

  static std::unique_ptr<Scorer> from_json(const json& j) {
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(Tree::from_json(t));
    return std::make_unique<BaggedTreesScorer>(std::move(trees));
  }

 private:
  std::vector<Tree> trees_;
};

std::unique_ptr<Scorer> train_bagged(const MatrixXd& X, const std::vector<int>& y,
                                     const VectorXd& sample_weight, int n_trees, int max_depth,
                                     double min_leaf, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  VectorXd target(n);
  for (int i = 0; i < n; ++i) target[i] = y[static_cast<size_t>(i)];
  const int mtry =
      std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(X.cols())))));

  std::mt19937_64 rng(seed);
  std::vector<Tree> trees;
  trees.reserve(static_cast<size_t>(n_trees));
  for (int t = 0; t < n_trees; ++t) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> rows(static_cast<size_t>(n));
    for (auto& r : rows) r = pick(rng);
    std::sort(rows.begin(), rows.end());
    TreeParams params{max_depth, min_leaf, mtry, false};
    TreeBuilder builder(X, target, sample_weight, params, rng);
    trees.push_back(builder.build(rows));
  }
  return std::make_unique<BaggedTreesScorer>(std::move(trees));
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees (logistic loss, Newton leaf values)

class BoostedTreesScorer : public Scorer {
 public:
  BoostedTreesScorer(double base, double learning_rate, std::vector<Tree> trees)
      : base_(base), lr_(learning_rate), trees_(std::move(trees)) {}

  double score(const Eigen::Ref<const VectorXd>& x) const override {
    double f = base_;
    for (const auto& t : trees_) f += lr_ * t.predict(x);
    return sigmoid(f);
  }

  std::string family_name() const override { return "boosted-trees"; }

  json to_json() const override {
    json arr = json::array();
    for (const auto& t : trees_) arr.push_back(t.to_json());
    return json{{"kind", "boosted"}, {"base", base_}, {"lr", lr_}, {"trees", arr}};
  }

  static std::unique_ptr<Scorer> from_json(const json& j) {
    std::vector<Tree> trees;
    for (const auto& t : j.at("trees")) trees.push_back(Tree::from_json(t));
    return std::make_unique<BoostedTreesScorer>(j.at("base").get<double>(),
                                                j.at("lr").get<double>(), std::move(trees));
  }

 private:
  double base_ = 0.0;
  double lr_ = 0.1;
  std::vector<Tree> trees_;
};

std::unique_ptr<Scorer> train_boosted(const MatrixXd& X, const std::vector<int>& y,
                                      const VectorXd& sample_weight, int rounds,
                                      double learning_rate, int max_depth, std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  double pos_w = 0.0, neg_w = 0.0;
  for (int i = 0; i < n; ++i)
    (y[static_cast<size_t>(i)] == 1 ? pos_w : neg_w) += sample_weight[i];
  const double base = std::log(std::max(pos_w, 1e-9) / std::max(neg_w, 1e-9));

  VectorXd f = VectorXd::Constant(n, base);
  std::vector<int> all_rows(static_cast<size_t>(n));
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::mt19937_64 rng(seed);
  std::vector<Tree> trees;
  trees.reserve(static_cast<size_t>(rounds));
  for (int round = 0; round < rounds; ++round) {
    VectorXd residual(n), hessian_weight(n);
    for (int i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      residual[i] = static_cast<double>(y[static_cast<size_t>(i)]) - p;
      hessian_weight[i] = std::max(p * (1.0 - p), 1e-6);
    }
    TreeParams params{max_depth, 1.0, 0, true};
    TreeBuilder builder(X, residual, sample_weight, params, rng);
    Tree tree = builder.build(all_rows);

    // Newton step per leaf: sum(w*residual) / sum(w*p(1-p)) over leaf members
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (int i = 0; i < n; ++i) {
      int node = 0;
      while (tree.nodes[static_cast<size_t>(node)].feature >= 0) {
        const auto& nd = tree.nodes[static_cast<size_t>(node)];
        node = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
      }
      num[static_cast<size_t>(node)] += sample_weight[i] * residual[i];
      den[static_cast<size_t>(node)] += sample_weight[i] * hessian_weight[i];
    }
    for (size_t nd = 0; nd < tree.nodes.size(); ++nd) {
      if (tree.nodes[nd].feature >= 0) continue;
      const double v = den[nd] > 0.0 ? num[nd] / den[nd] : 0.0;
      tree.nodes[nd].value = std::clamp(v, -4.0, 4.0);
    }
    for (int i = 0; i < n; ++i)
      f[i] += learning_rate * tree.predict(X.row(i));
    trees.push_back(std::move(tree));
  }
  return std::make_unique<BoostedTreesScorer>(base, learning_rate, std::move(trees));
}

double hyper_or(const LearnerSpec& spec, const std::string& key, double fallback) {
  auto it = spec.hyper.find(key);
  return it == spec.hyper.end() ? fallback : it->second;
}

}  // namespace

std::unique_ptr<Scorer> train_scorer(const MatrixXd& X, const std::vector<int>& y,
                                     const LearnerSpec& spec, const TrainOptions& options) {
  if (X.rows() == 0 || static_cast<size_t>(X.rows()) != y.size())
    throw DataError("train_scorer: feature/label size mismatch");
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<long>(y.size()))
    throw DataError("train_scorer: training data contains a single class");

  const VectorXd w = class_weights(y, options.class_weighting);
  switch (spec.family) {
    case LearnerFamily::regularized_linear:
      return train_logistic(X, y, w, hyper_or(spec, "lambda", 1e-3),
                            hyper_or(spec, "learning_rate", 0.5),
                            static_cast<int>(hyper_or(spec, "iterations", 300)));
    case LearnerFamily::bagged_trees:
      return train_bagged(X, y, w, static_cast<int>(hyper_or(spec, "n_trees", 50)),
                          static_cast<int>(hyper_or(spec, "max_depth", 8)),
                          hyper_or(spec, "min_leaf_weight", 1.0), spec.seed);
    case LearnerFamily::boosted_trees:
      return train_boosted(X, y, w, static_cast<int>(hyper_or(spec, "rounds", 80)),
                           hyper_or(spec, "learning_rate", 0.1),
                           static_cast<int>(hyper_or(spec, "max_depth", 3)), spec.seed);
  }
  throw ConfigError("train_scorer: unknown family");
}

namespace {

LearnerSpec draw_hyper(const LearnerSpec& base, std::mt19937_64& rng) {
  LearnerSpec spec = base;
  auto uni = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
  };
  switch (base.family) {
    case LearnerFamily::regularized_linear:
      spec.hyper["lambda"] = std::pow(10.0, uni(-5.0, -1.0));
      spec.hyper["learning_rate"] = uni(0.2, 1.0);
      spec.hyper["iterations"] = std::floor(uni(200.0, 500.0));
      break;
    case LearnerFamily::bagged_trees:
      spec.hyper["n_trees"] = std::floor(uni(25.0, 80.0));
      spec.hyper["max_depth"] = std::floor(uni(4.0, 13.0));
      spec.hyper["min_leaf_weight"] = std::floor(uni(1.0, 4.0));
      break;
    case LearnerFamily::boosted_trees:
      spec.hyper["rounds"] = std::floor(uni(40.0, 150.0));
      spec.hyper["learning_rate"] = uni(0.05, 0.3);
      spec.hyper["max_depth"] = std::floor(uni(2.0, 5.0));
      break;
  }
  return spec;
}

/// Stratified deterministic fold ids.
std::vector<int> fold_assignment(const std::vector<int>& y, int folds) {
  std::vector<int> fold(y.size());
  int next_pos = 0, next_neg = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1)
      fold[i] = next_pos++ % folds;
    else
      fold[i] = next_neg++ % folds;
  }
  return fold;
}

}  // namespace

TunedScorer tune_and_train(const MatrixXd& X, const std::vector<int>& y, const LearnerSpec& spec,
                           const TrainOptions& options) {
  std::mt19937_64 rng(spec.seed ^ 0xA5A5A5A5ULL);
  const auto folds = fold_assignment(y, options.cv_folds);

  LearnerSpec best_spec = spec;
  double best_f1 = -1.0;
  for (int draw = 0; draw < std::max(1, options.search_budget); ++draw) {
    LearnerSpec candidate = draw_hyper(spec, rng);
    double f1_sum = 0.0;
    int scored = 0;
    for (int fold = 0; fold < options.cv_folds; ++fold) {
      std::vector<int> train_rows, test_rows;
      for (size_t i = 0; i < y.size(); ++i)
        (folds[i] == fold ? test_rows : train_rows).push_back(static_cast<int>(i));
      if (train_rows.empty() || test_rows.empty()) continue;
      MatrixXd Xtr(train_rows.size(), X.cols()), Xte(test_rows.size(), X.cols());
      std::vector<int> ytr, yte;
      for (size_t i = 0; i < train_rows.size(); ++i) {
        Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_rows[i]);
        ytr.push_back(y[static_cast<size_t>(train_rows[i])]);
      }
      for (size_t i = 0; i < test_rows.size(); ++i) {
        Xte.row(static_cast<Eigen::Index>(i)) = X.row(test_rows[i]);
        yte.push_back(y[static_cast<size_t>(test_rows[i])]);
      }
      if (std::count(ytr.begin(), ytr.end(), 1) == 0 ||
          std::count(ytr.begin(), ytr.end(), 0) == 0)
        continue;
      auto scorer = train_scorer(Xtr, ytr, candidate, options);
      f1_sum += f1_score(yte, scorer->score_matrix(Xte), 0.5);
      ++scored;
    }
    const double mean_f1 = scored > 0 ? f1_sum / scored : 0.0;
    if (mean_f1 > best_f1) {
      best_f1 = mean_f1;
      best_spec = candidate;
    }
  }

  TunedScorer out;
  out.scorer = train_scorer(X, y, best_spec, options);
  out.tuned_spec = best_spec;
  out.cv_f1 = best_f1;
  return out;
}

std::unique_ptr<Scorer> scorer_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "logistic") return LogisticScorer::from_json(j);
  if (kind == "bagged") return BaggedTreesScorer::from_json(j);
  if (kind == "boosted") return BoostedTreesScorer::from_json(j);
  throw ConfigError("unknown scorer kind: " + kind);
}

}  // namespace tabfuse
