#pragma once

#include "tierplan/catalog.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace tierplan {

/// 0 = popular (used in the label window), 1 = unpopular.
enum class Label : int { Popular = 0, Unpopular = 1 };

constexpr int label_value(Label l) noexcept { return static_cast<int>(l); }

Label compute_label(const UsageHistory& history, const SplitConfig& split);

/// Shape descriptors of the observation window plus encoded metadata.
///
/// With U the sorted weeks (1-based) of nonzero usage and y_t the counts:
///   nb_peaks          |U|
///   last_zeros        observation_weeks - max(U)   (observation_weeks if U is empty)
///   inter_*           max / mean / population std of consecutive gaps in U,
///                     inter_rel = inter_std / inter_mean (all 0 with fewer than 2 uses)
///   mass_center       sum t*y / sum y
///   mass_center_sqrt  sum t*sqrt(y) / sum sqrt(y)
///   mass_moment       sum t^2*y / sum y
///   r_moment          sum t*y^2 / sum y^2
/// The moment features are 0 when U is empty.
struct FeatureVector {
  int nb_peaks = 0;
  int last_zeros = 0;
  double inter_max = 0.0;
  double inter_mean = 0.0;
  double inter_std = 0.0;
  double inter_rel = 0.0;
  double mass_center = 0.0;
  double mass_center_sqrt = 0.0;
  double mass_moment = 0.0;
  double r_moment = 0.0;
  Eigen::VectorXd encoded_metadata;
  Label label = Label::Popular;

  static constexpr int kSeriesFeatures = 10;

  /// Series features followed by encoded metadata, in `feature_names()` order.
  Eigen::VectorXd to_row() const;

  friend bool operator==(const FeatureVector& a, const FeatureVector& b);
};

/// Column names matching FeatureVector::to_row().
const std::vector<std::string>& feature_names();

/// Shape features of one window (index 0 = week 1). Label and metadata are left empty.
FeatureVector shape_features(const Eigen::Ref<const Eigen::VectorXd>& window);

/// Numeric metadata passed through, categorical fields hashed to [0, 1).
/// last_usage_week is excluded: it is taken over the full history and would
/// reveal the label.
Eigen::VectorXd encode_metadata(const DatasetMetadata& metadata, const SplitConfig& split);

FeatureVector extract_features(const UsageHistory& history, const DatasetMetadata& metadata,
                               const SplitConfig& split);

std::vector<FeatureVector> extract_all(const std::vector<DatasetRecord>& records, const SplitConfig& split);

/// Row-per-dataset design matrix.
Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& features);

void write_feature_dump(const std::vector<DatasetRecord>& records, const std::vector<FeatureVector>& features,
                        std::ostream& out);

}  // namespace tierplan
