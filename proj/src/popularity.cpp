#include "tierplan/popularity.hpp"

#include "tierplan/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <future>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tierplan {

Halves split_halves(const std::vector<DatasetRecord>& records, std::uint64_t seed) {
  if (records.size() < 2) throw std::invalid_argument("split_halves needs at least 2 records");
  std::vector<std::pair<std::uint64_t, int>> keyed;
  keyed.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    keyed.emplace_back(hash_string(records[i].id(), seed), static_cast<int>(i));
  std::sort(keyed.begin(), keyed.end());

  Halves h;
  const std::size_t n_a = (records.size() + 1) / 2;
  for (std::size_t k = 0; k < keyed.size(); ++k) (k < n_a ? h.a : h.b).push_back(keyed[k].second);
  std::sort(h.a.begin(), h.a.end());
  std::sort(h.b.begin(), h.b.end());
  return h;
}

namespace {

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(idx[k]);
  return out;
}

Eigen::VectorXi labels_of(const std::vector<FeatureVector>& features, const std::vector<int>& idx) {
  Eigen::VectorXi y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) y(static_cast<Eigen::Index>(k)) = label_value(features[idx[k]].label);
  return y;
}

}  // namespace

CrossPrediction cross_predict(const std::vector<DatasetRecord>& records, const std::vector<FeatureVector>& features,
                              std::uint64_t seed, const GbdtConfig& config, int threads) {
  if (records.size() != features.size()) throw std::invalid_argument("records and features are not aligned");
  CrossPrediction out;
  out.halves = split_halves(records, seed);
  const Eigen::MatrixXd X = feature_matrix(features);

  const std::array<const std::vector<int>*, 2> train = {&out.halves.a, &out.halves.b};
  for (int f = 0; f < 2; ++f) {
    const auto y = labels_of(features, *train[f]);
    if ((y.array() == 0).all() || (y.array() != 0).all())
      throw std::invalid_argument(std::string("degenerate training set: half ") + (f == 0 ? "a" : "b") +
                                  " contains a single class");
  }

  auto fit = [&](int f) {
    return train_gbdt(rows_of(X, *train[f]), labels_of(features, *train[f]), config, feature_names());
  };
  if (threads > 1) {
    auto second = std::async(std::launch::async, fit, 1);
    out.models[0] = fit(0);
    out.models[1] = second.get();
  } else {
    out.models[0] = fit(0);
    out.models[1] = fit(1);
  }

  out.probability.resize(static_cast<Eigen::Index>(records.size()));
  for (int i : out.halves.b) out.probability(i) = out.models[0].predict_probability(X.row(i).transpose());
  for (int i : out.halves.a) out.probability(i) = out.models[1].predict_probability(X.row(i).transpose());
  return out;
}

CrossPrediction cross_predict(const std::vector<DatasetRecord>& records, const SplitConfig& split,
                              std::uint64_t seed, const GbdtConfig& config, int threads) {
  return cross_predict(records, extract_all(records, split), seed, config, threads);
}

CalibrationMap fit_calibration(std::span<const double> label1_probabilities) {
  if (label1_probabilities.empty()) throw std::invalid_argument("calibration needs at least one label-1 probability");
  CalibrationMap map;
  map.reference.assign(label1_probabilities.begin(), label1_probabilities.end());
  std::sort(map.reference.begin(), map.reference.end());
  return map;
}

CalibrationMap fit_calibration(const Eigen::VectorXd& probability, const std::vector<FeatureVector>& features) {
  std::vector<double> ref;
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].label == Label::Unpopular) ref.push_back(probability(static_cast<Eigen::Index>(i)));
  return fit_calibration(ref);
}

double popularity(const CalibrationMap& map, double probability) {
  const auto& r = map.reference;
  const auto lo = std::lower_bound(r.begin(), r.end(), probability);
  const auto hi = std::upper_bound(lo, r.end(), probability);
  const double below = static_cast<double>(lo - r.begin());
  const double ties = static_cast<double>(hi - lo);
  return (below + 0.5 * ties) / static_cast<double>(r.size());
}

void save_calibration(const CalibrationMap& map, std::ostream& out) {
  out << nlohmann::json(map.reference).dump() << '\n';
}

CalibrationMap load_calibration(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    return fit_calibration(j.get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed calibration JSON: ") + e.what());
  }
}

double roc_auc(std::span<const double> score, std::span<const int> labels) {
  if (score.size() != labels.size()) throw std::invalid_argument("scores and labels are not aligned");
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });

  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    while (end < order.size() && score[order[end]] == score[order[k]]) ++end;
    const double mid_rank = (static_cast<double>(k + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t m = k; m < end; ++m)
      if (labels[order[m]]) {
        rank_sum += mid_rank;
        n_pos += 1.0;
      }
    k = end;
  }
  const double n_neg = static_cast<double>(score.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw std::invalid_argument("AUC needs both classes");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace tierplan
