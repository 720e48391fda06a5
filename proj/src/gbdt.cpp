#include "tierplan/gbdt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tierplan {

namespace {

// log(1 + e^z) - y z, computed without overflow.
double sample_loss(double raw, int y) {
  const double softplus = raw > 0.0 ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
  return softplus - (y ? raw : 0.0);
}

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct ScanState {
  int count = 0;
  double sum = 0.0;
  double last = 0.0;
  bool has_last = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<std::vector<int>>& order,
              const GbdtConfig& config)
      : X_(X), order_(order), config_(config), node_of_(static_cast<std::size_t>(X.rows()), 0) {}

  /// Grows the tree structure on residuals; leaves are left with value 0.
  RegressionTree grow(const Eigen::VectorXd& residual) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::fill(node_of_.begin(), node_of_.end(), 0);

    std::vector<int> frontier = {0};
    std::vector<int> count(1, static_cast<int>(X_.rows()));
    std::vector<double> sum(1, residual.sum());

    for (int depth = 0; depth < config_.max_depth && !frontier.empty(); ++depth) {
      std::vector<int> slot_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[frontier[s]] = static_cast<int>(s);

      std::vector<SplitCandidate> best(frontier.size());
      std::vector<ScanState> state(frontier.size());
      for (int j = 0; j < static_cast<int>(X_.cols()); ++j) {
        std::fill(state.begin(), state.end(), ScanState{});
        for (int idx : order_[j]) {
          const int slot = slot_of[node_of_[idx]];
          if (slot < 0) continue;
          const int node = frontier[slot];
          auto& st = state[slot];
          const double v = X_(idx, j);
          const int n_left = st.count;
          const int n_right = count[node] - n_left;
          if (st.has_last && v > st.last && n_left >= config_.min_samples_leaf &&
              n_right >= config_.min_samples_leaf) {
            const double s_right = sum[node] - st.sum;
            const double gain =
                st.sum * st.sum / n_left + s_right * s_right / n_right - sum[node] * sum[node] / count[node];
            if (gain > best[slot].gain && gain > 1e-12) {
              double threshold = st.last + (v - st.last) / 2.0;
              if (!(threshold < v)) threshold = st.last;
              best[slot] = {j, threshold, gain};
            }
          }
          st.count += 1;
          st.sum += residual(idx);
          st.last = v;
          st.has_last = true;
        }
      }

      std::vector<int> next;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        if (best[s].feature < 0) continue;
        const int node = frontier[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        auto& parent = tree.nodes[node];
        parent.feature = best[s].feature;
        parent.threshold = best[s].threshold;
        parent.left = left;
        parent.right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      if (next.empty()) break;

      count.assign(tree.nodes.size(), 0);
      sum.assign(tree.nodes.size(), 0.0);
      for (std::size_t i = 0; i < node_of_.size(); ++i) {
        const auto& n = tree.nodes[node_of_[i]];
        if (n.feature < 0) continue;
        const int child = X_(static_cast<Eigen::Index>(i), n.feature) <= n.threshold ? n.left : n.right;
        node_of_[i] = child;
        count[child] += 1;
        sum[child] += residual(static_cast<Eigen::Index>(i));
      }
      frontier = std::move(next);
    }
    return tree;
  }

  const std::vector<int>& leaf_assignment() const { return node_of_; }

 private:
  const Eigen::Ref<const Eigen::MatrixXd>& X_;
  const std::vector<std::vector<int>>& order_;
  const GbdtConfig& config_;
  std::vector<int> node_of_;
};

}  // namespace

void GbdtConfig::validate() const {
  if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be >= 1");
}

int RegressionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].feature < 0) continue;
    level[nodes[k].left] = level[nodes[k].right] = level[k] + 1;
    deepest = std::max(deepest, level[k] + 1);
  }
  return deepest;
}

double GbdtModel::raw_score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != n_features)
    throw std::invalid_argument("feature arity mismatch: model expects " + std::to_string(n_features) + ", got " +
                                std::to_string(x.size()));
  double tree_sum = 0.0;
  for (const auto& t : trees) tree_sum += t.predict(x);
  return base_score + learning_rate * tree_sum;
}

double GbdtModel::predict_probability(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return sigmoid(raw_score(x));
}

Eigen::VectorXd GbdtModel::predict_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  Eigen::VectorXd p(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) p(i) = predict_probability(X.row(i).transpose());
  return p;
}

double log_loss(const Eigen::Ref<const Eigen::VectorXd>& probability, const Eigen::Ref<const Eigen::VectorXi>& labels) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < probability.size(); ++i) {
    const double p = std::clamp(probability(i), 1e-15, 1.0 - 1e-15);
    total -= labels(i) ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(probability.size());
}

GbdtModel train_gbdt(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXi>& labels,
                     const GbdtConfig& config, std::vector<std::string> feature_names) {
  config.validate();
  const auto n = X.rows();
  if (n == 0 || labels.size() != n) throw std::invalid_argument("training matrix and labels are not aligned");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
    throw std::invalid_argument("feature name count does not match matrix columns");
  const auto positives = static_cast<double>((labels.array() != 0).count());
  if (positives == 0 || positives == static_cast<double>(n)) throw std::invalid_argument("degenerate training set");

  GbdtModel model;
  model.learning_rate = config.learning_rate;
  model.n_features = static_cast<int>(X.cols());
  model.feature_names = std::move(feature_names);
  const double prior = positives / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<std::vector<int>> order(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    auto& o = order[j];
    o.resize(static_cast<std::size_t>(n));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return X(a, j) < X(b, j); });
  }

  Eigen::VectorXd raw = Eigen::VectorXd::Constant(n, model.base_score);
  auto total_loss = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += sample_loss(raw(i), labels(i));
    return s / static_cast<double>(n);
  };
  model.training_loss.push_back(total_loss());

  TreeBuilder builder(X, order, config);
  Eigen::VectorXd residual(n), hessian(n);
  for (int round = 0; round < config.n_trees; ++round) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(raw(i));
      residual(i) = (labels(i) ? 1.0 : 0.0) - p;
      hessian(i) = p * (1.0 - p);
    }
    RegressionTree tree = builder.grow(residual);
    const auto& leaf_of = builder.leaf_assignment();

    const std::size_t n_nodes = tree.nodes.size();
    std::vector<double> g(n_nodes, 0.0), h(n_nodes, 0.0);
    std::vector<std::vector<Eigen::Index>> members(n_nodes);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int leaf = leaf_of[static_cast<std::size_t>(i)];
      g[leaf] += residual(i);
      h[leaf] += hessian(i);
      members[leaf].push_back(i);
    }

    // Newton step per leaf, halved until the leaf's own loss does not rise.
    // Leaves partition the samples, so the total loss is non-increasing.
    for (std::size_t k = 0; k < n_nodes; ++k) {
      auto& node = tree.nodes[k];
      if (node.feature >= 0 || members[k].empty()) continue;
      double step = h[k] > 1e-12 ? g[k] / h[k] : 0.0;
      double before = 0.0;
      for (auto i : members[k]) before += sample_loss(raw(i), labels(i));
      for (int attempt = 0; attempt < 40 && step != 0.0; ++attempt) {
        double after = 0.0;
        for (auto i : members[k]) after += sample_loss(raw(i) + config.learning_rate * step, labels(i));
        if (after <= before) break;
        step = attempt == 39 ? 0.0 : step / 2.0;
      }
      node.value = step;
      for (auto i : members[k]) raw(i) += config.learning_rate * step;
    }

    model.trees.push_back(std::move(tree));
    model.training_loss.push_back(total_loss());
  }
  return model;
}

// ---- serialization -----------------------------------------------------------

namespace {

nlohmann::ordered_json node_to_json(const RegressionTree& tree, int k) {
  const auto& n = tree.nodes[k];
  nlohmann::ordered_json j;
  if (n.feature < 0) {
    j["leaf_value"] = n.value;
    return j;
  }
  j["feature_index"] = n.feature;
  j["threshold"] = n.threshold;
  j["left"] = node_to_json(tree, n.left);
  j["right"] = node_to_json(tree, n.right);
  return j;
}

int node_from_json(const nlohmann::json& j, RegressionTree& tree) {
  const int k = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf_value")) {
    tree.nodes[k].value = j.at("leaf_value").get<double>();
    return k;
  }
  const int feature = j.at("feature_index").get<int>();
  const double threshold = j.at("threshold").get<double>();
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  auto& n = tree.nodes[k];
  n.feature = feature;
  n.threshold = threshold;
  n.left = left;
  n.right = right;
  return k;
}

}  // namespace

void save_model(const GbdtModel& model, std::ostream& out) {
  nlohmann::ordered_json j;
  j["base_score"] = model.base_score;
  j["learning_rate"] = model.learning_rate;
  j["n_features"] = model.n_features;
  j["feature_names"] = model.feature_names;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : model.trees) trees.push_back(node_to_json(t, 0));
  j["trees"] = std::move(trees);
  out << j.dump(1) << '\n';
}

GbdtModel load_model(std::istream& in) {
  GbdtModel model;
  try {
    nlohmann::json j;
    in >> j;
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.n_features = j.contains("n_features") ? j.at("n_features").get<int>()
                                                : static_cast<int>(model.feature_names.size());
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      node_from_json(t, tree);
      for (const auto& n : tree.nodes)
        if (n.feature >= model.n_features) throw std::invalid_argument("tree feature index out of range");
      model.trees.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed model JSON: ") + e.what());
  }
  return model;
}

}  // namespace tierplan
