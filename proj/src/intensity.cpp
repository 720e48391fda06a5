#include "tierplan/intensity.hpp"

#include "csv_util.hpp"
#include "tierplan/parallel.hpp"

#include <ostream>

namespace tierplan {

std::vector<double> default_bandwidth_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 60; ++k) grid.push_back(0.5 * k);
  return grid;
}

int quantile_window(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("quantile_window: no values");
  std::sort(values.begin(), values.end());
  // Need ceil(0.9 n) values strictly below W, i.e. W > the ceil(0.9 n)-th smallest.
  const std::size_t needed = (9 * values.size() + 9) / 10;
  const double v = values[needed - 1];
  return std::max(1, static_cast<int>(std::floor(v)) + 1);
}

WindowMap rolling_window_widths(const std::vector<FeatureVector>& corpus_features) {
  if (corpus_features.empty()) throw std::invalid_argument("rolling_window_widths: empty corpus");
  std::map<int, std::vector<double>> groups;
  std::vector<double> all;
  all.reserve(corpus_features.size());
  for (const auto& fv : corpus_features) {
    groups[fv.nb_peaks].push_back(fv.inter_max);
    all.push_back(fv.inter_max);
  }
  WindowMap map;
  map.global = quantile_window(std::move(all));
  for (auto& [peaks, values] : groups)
    map.by_nb_peaks[peaks] = values.size() < kMinWindowGroupSize ? map.global : quantile_window(std::move(values));
  return map;
}

IntensityPredictor::IntensityPredictor(const SplitConfig& split, std::vector<double> h_grid, WindowMap windows)
    : split_(split), selector_(split.observation_weeks, std::move(h_grid)), windows_(std::move(windows)) {}

IntensityForecast IntensityPredictor::predict(const DatasetRecord& record) const {
  if (record.history.weeks() < split_.observation_weeks)
    throw std::invalid_argument("usage history shorter than the observation window");
  const Eigen::VectorXd y = record.history.counts.head(split_.observation_weeks);

  IntensityForecast f;
  f.bandwidth_h = selector_.select(y);
  f.smoothed = nw_smooth(y, f.bandwidth_h);
  f.window_w = windows_.width_for(shape_features(y).nb_peaks);
  f.rolling = rolling_mean(f.smoothed, f.window_w);
  f.predicted_intensity = std::max(0.0, f.rolling(f.rolling.size() - 1));
  return f;
}

std::vector<IntensityForecast> IntensityPredictor::predict_all(const std::vector<DatasetRecord>& records,
                                                                int threads) const {
  std::vector<IntensityForecast> out(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { out[i] = predict(records[i]); });
  return out;
}

IntensityForecast predict_intensity(const DatasetRecord& record, const SplitConfig& split,
                                    const std::vector<double>& h_grid, const WindowMap& window_map) {
  return IntensityPredictor(split, h_grid, window_map).predict(record);
}

void write_intensity_dump(const std::vector<DatasetRecord>& records, const std::vector<IntensityForecast>& forecasts,
                          std::ostream& out) {
  if (records.size() != forecasts.size()) throw std::invalid_argument("records and forecasts are not aligned");
  out << "dataset_id,bandwidth_h,window_w,predicted_intensity\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    out << csv::quote(records[i].id()) << ',' << csv::format_real(forecasts[i].bandwidth_h) << ','
        << forecasts[i].window_w << ',' << csv::format_real(forecasts[i].predicted_intensity) << '\n';
}

}  // namespace tierplan
