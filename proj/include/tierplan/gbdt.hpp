#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tierplan {

struct GbdtConfig {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  std::uint64_t seed = 0;  // no subsampling yet; kept so configs are complete

  void validate() const;
};

/// Flat binary regression tree. A node is a leaf when `feature < 0`.
/// Samples with x[feature] <= threshold go left.
struct RegressionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes;

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    int k = 0;
    while (nodes[k].feature >= 0) k = x(nodes[k].feature) <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
    return nodes[k].value;
  }

  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Gradient-boosted trees for binary log-loss. Raw score = base_score +
/// learning_rate * sum of tree outputs; probability = sigmoid(raw score).
struct GbdtModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::vector<std::string> feature_names;
  int n_features = 0;

  /// Training log-loss after the initial constant and after each round.
  std::vector<double> training_loss;

  double raw_score(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double predict_probability(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Row-wise probabilities for a design matrix.
  Eigen::VectorXd predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;
};

/// Throws std::invalid_argument("degenerate training set") when `labels`
/// holds a single class.
GbdtModel train_gbdt(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& labels,
                     const GbdtConfig& config, std::vector<std::string> feature_names = {});

double log_loss(const Eigen::Ref<const Eigen::VectorXd>& probability, const Eigen::Ref<const Eigen::VectorXi>& labels);

/// Numerically stable logistic function.
inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void save_model(const GbdtModel& model, std::ostream& out);
GbdtModel load_model(std::istream& in);

}  // namespace tierplan
