#include "tierplan/features.hpp"

#include "csv_util.hpp"
#include "tierplan/random.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace tierplan {

namespace {

constexpr std::uint64_t kEncodingSeed = 0x74696572706C616EULL;

const std::vector<std::string>& metadata_names() {
  static const std::vector<std::string> names = {
      "creation_week", "first_usage_week", "replica_size_gb", "replicas_on_disk", "origin",
      "configuration", "file_type",        "data_type",       "event_type"};
  return names;
}

double hashed_category(const std::string& value, std::uint64_t field) {
  return to_unit_interval(hash_string(value, kEncodingSeed ^ field));
}

void require_length(const UsageHistory& history, const SplitConfig& split) {
  if (history.weeks() < split.total_weeks())
    throw std::invalid_argument("usage history has " + std::to_string(history.weeks()) + " weeks, split needs " +
                                std::to_string(split.total_weeks()));
}

}  // namespace

Label compute_label(const UsageHistory& history, const SplitConfig& split) {
  require_length(history, split);
  const auto window = history.counts.segment(split.observation_weeks, split.label_weeks);
  return (window.array() > 0.0).any() ? Label::Popular : Label::Unpopular;
}

Eigen::VectorXd FeatureVector::to_row() const {
  Eigen::VectorXd row(kSeriesFeatures + encoded_metadata.size());
  row << nb_peaks, last_zeros, inter_max, inter_mean, inter_std, inter_rel, mass_center, mass_center_sqrt,
      mass_moment, r_moment, encoded_metadata;
  return row;
}

bool operator==(const FeatureVector& a, const FeatureVector& b) {
  return a.to_row().size() == b.to_row().size() && a.to_row() == b.to_row() && a.label == b.label;
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"nb_peaks",    "last_zeros",  "inter_max",        "inter_mean",  "inter_std",
                                  "inter_rel",   "mass_center", "mass_center_sqrt", "mass_moment", "r_moment"};
    for (const auto& m : metadata_names()) n.push_back("meta_" + m);
    return n;
  }();
  return names;
}

FeatureVector shape_features(const Eigen::Ref<const Eigen::VectorXd>& window) {
  FeatureVector fv;
  const int n = static_cast<int>(window.size());

  std::vector<int> used;
  double sum_y = 0.0, sum_ty = 0.0, sum_sqrt = 0.0, sum_t_sqrt = 0.0, sum_t2y = 0.0, sum_y2 = 0.0, sum_ty2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = window(i);
    if (!(y > 0.0)) continue;
    const double t = i + 1;
    used.push_back(i + 1);
    sum_y += y;
    sum_ty += t * y;
    sum_t2y += t * t * y;
    sum_sqrt += std::sqrt(y);
    sum_t_sqrt += t * std::sqrt(y);
    sum_y2 += y * y;
    sum_ty2 += t * y * y;
  }

  fv.nb_peaks = static_cast<int>(used.size());
  fv.last_zeros = used.empty() ? n : n - used.back();
  if (used.empty()) return fv;

  fv.mass_center = sum_ty / sum_y;
  fv.mass_center_sqrt = sum_t_sqrt / sum_sqrt;
  fv.mass_moment = sum_t2y / sum_y;
  // y^2 can underflow for tiny counts; fall back to the plain centre.
  fv.r_moment = sum_y2 > 0.0 ? sum_ty2 / sum_y2 : fv.mass_center;

  if (used.size() >= 2) {
    Eigen::ArrayXd gaps(static_cast<Eigen::Index>(used.size() - 1));
    for (std::size_t j = 0; j + 1 < used.size(); ++j) gaps(static_cast<Eigen::Index>(j)) = used[j + 1] - used[j];
    fv.inter_max = gaps.maxCoeff();
    fv.inter_mean = gaps.mean();
    fv.inter_std = std::sqrt((gaps - fv.inter_mean).square().mean());
    fv.inter_rel = fv.inter_mean > 0.0 ? fv.inter_std / fv.inter_mean : 0.0;
  }
  return fv;
}

Eigen::VectorXd encode_metadata(const DatasetMetadata& m, const SplitConfig& split) {
  const bool first_seen = m.first_usage_week >= 1 && m.first_usage_week <= split.observation_weeks;
  Eigen::VectorXd enc(static_cast<Eigen::Index>(metadata_names().size()));
  enc << m.creation_week, first_seen ? m.first_usage_week : 0, m.replica_size_gb, m.replicas_on_disk,
      hashed_category(m.origin, 1), hashed_category(m.configuration, 2), hashed_category(m.file_type, 3),
      hashed_category(m.data_type, 4), hashed_category(m.event_type, 5);
  return enc;
}

FeatureVector extract_features(const UsageHistory& history, const DatasetMetadata& metadata,
                               const SplitConfig& split) {
  require_length(history, split);
  FeatureVector fv = shape_features(history.counts.head(split.observation_weeks));
  fv.encoded_metadata = encode_metadata(metadata, split);
  fv.label = compute_label(history, split);
  return fv;
}

std::vector<FeatureVector> extract_all(const std::vector<DatasetRecord>& records, const SplitConfig& split) {
  std::vector<FeatureVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(extract_features(r.history, r.metadata, split));
  return out;
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& features) {
  if (features.empty()) return {};
  const auto cols = features.front().to_row().size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(features.size()), cols);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto row = features[i].to_row();
    if (row.size() != cols) throw std::invalid_argument("feature vectors differ in arity");
    X.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return X;
}

void write_feature_dump(const std::vector<DatasetRecord>& records, const std::vector<FeatureVector>& features,
                        std::ostream& out) {
  if (records.size() != features.size()) throw std::invalid_argument("records and features are not aligned");
  out << "dataset_id";
  for (const auto& name : feature_names()) out << ',' << name;
  out << ",label\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    out << csv::quote(records[i].id());
    const auto row = features[i].to_row();
    for (Eigen::Index k = 0; k < row.size(); ++k) out << ',' << csv::format_real(row(k));
    out << ',' << label_value(features[i].label) << '\n';
  }
}

}  // namespace tierplan
