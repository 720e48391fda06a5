#pragma once

#include "tierplan/catalog.hpp"
#include "tierplan/features.hpp"
#include "tierplan/gbdt.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tierplan {

/// Two disjoint halves of a corpus, as ascending record indices.
struct Halves {
  std::vector<int> a;
  std::vector<int> b;
};

/// Partition by seeded hash of dataset_id; |a| - |b| is 0 or 1.
Halves split_halves(const std::vector<DatasetRecord>& records, std::uint64_t seed);

struct CrossPrediction {
  Eigen::VectorXd probability;  // P(label = 1), out-of-fold, aligned with the records
  Halves halves;
  std::array<GbdtModel, 2> models;  // models[0] trained on half a, scores half b
};

/// Two-fold out-of-fold scoring: the model trained on one half scores the other.
/// `threads` > 1 trains the folds concurrently; results do not depend on it.
CrossPrediction cross_predict(const std::vector<DatasetRecord>& records, const std::vector<FeatureVector>& features,
                              std::uint64_t seed, const GbdtConfig& config, int threads = 1);

CrossPrediction cross_predict(const std::vector<DatasetRecord>& records, const SplitConfig& split,
                              std::uint64_t seed, const GbdtConfig& config, int threads = 1);

/// Sorted reference probabilities of label-1 datasets.
struct CalibrationMap {
  std::vector<double> reference;

  friend bool operator==(const CalibrationMap&, const CalibrationMap&) = default;
};

CalibrationMap fit_calibration(std::span<const double> label1_probabilities);

/// Mid-rank ECDF of the reference sample: (#{r < p} + #{r == p} / 2) / n.
/// Label-1 datasets from the reference distribution map to Uniform(0, 1);
/// values near 1 mean "likely unused".
double popularity(const CalibrationMap& map, double probability);

/// Reference probabilities of every label-1 dataset in the corpus.
CalibrationMap fit_calibration(const Eigen::VectorXd& probability, const std::vector<FeatureVector>& features);

void save_calibration(const CalibrationMap& map, std::ostream& out);
CalibrationMap load_calibration(std::istream& in);

/// Area under the ROC curve with mid-rank tie handling; labels 1 are positives.
double roc_auc(std::span<const double> score, std::span<const int> labels);

}  // namespace tierplan
