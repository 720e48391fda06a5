#pragma once

// Nonparametric usage-intensity forecast: Nadaraya-Watson smoothing with an
// RBF kernel (bandwidth by leave-one-out), a trailing rolling mean, and the
// last rolling value carried forward as the predicted weekly intensity.

#include "tierplan/catalog.hpp"
#include "tierplan/features.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace tierplan {

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr double kMaxBandwidthWeeks = 30.0;

/// {0.5, 1.0, ..., 30.0}.
std::vector<double> default_bandwidth_grid();

/// Kernel-smoothed series evaluated at every week of the window (the point
/// itself included). Output is a convex combination of the inputs, so it is
/// clamped to [min y, max y] to absorb rounding.
template <typename Derived>
Series<typename Derived::Scalar> nw_smooth(const Eigen::MatrixBase<Derived>& y, typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = y.size();
  if (n == 0) throw std::invalid_argument("nw_smooth: empty series");
  if (!(h > Scalar(0))) throw std::invalid_argument("nw_smooth: bandwidth must be positive");

  Series<Scalar> kernel(n);
  for (Eigen::Index d = 0; d < n; ++d) kernel(d) = std::exp(-Scalar(d * d) / (Scalar(2) * h * h));

  const Scalar lo = y.minCoeff();
  const Scalar hi = y.maxCoeff();
  Series<Scalar> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar num(0), den(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar k = kernel(i > j ? i - j : j - i);
      num += y(j) * k;
      den += k;
    }
    out(i) = std::clamp(num / den, lo, hi);
  }
  return out;
}

/// Precomputed leave-one-out kernel matrices for one series length and one
/// bandwidth grid (sorted ascending). Rows of each matrix have a zero diagonal,
/// so W * y gives the numerators of the held-out estimates directly.
template <typename Scalar>
class LooBandwidthSelector {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  LooBandwidthSelector(Eigen::Index length, std::vector<Scalar> grid) : grid_(std::move(grid)) {
    if (length < 2) throw std::invalid_argument("leave-one-out needs at least 2 points");
    if (grid_.empty()) throw std::invalid_argument("bandwidth grid is empty");
    for (Scalar h : grid_)
      if (!(h > Scalar(0)) || h > Scalar(kMaxBandwidthWeeks))
        throw std::invalid_argument("bandwidth grid values must lie in (0, 30] weeks");
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());

    weights_.reserve(grid_.size());
    denominators_.reserve(grid_.size());
    for (Scalar h : grid_) {
      Matrix w(length, length);
      for (Eigen::Index i = 0; i < length; ++i)
        for (Eigen::Index j = 0; j < length; ++j) {
          const Scalar d = Scalar(i - j);
          w(i, j) = i == j ? Scalar(0) : std::exp(-d * d / (Scalar(2) * h * h));
        }
      denominators_.push_back(w.rowwise().sum());
      weights_.push_back(std::move(w));
    }
  }

  const std::vector<Scalar>& grid() const noexcept { return grid_; }
  Eigen::Index length() const noexcept { return weights_.front().rows(); }

  /// Sum over i of (held-out estimate at x_i - y_i)^2; +inf where a held-out
  /// kernel mass underflows to zero.
  template <typename Derived>
  Scalar loo(const Eigen::MatrixBase<Derived>& y, std::size_t grid_index) const {
    check_length(y);
    const Series<Scalar> num = weights_[grid_index] * y;
    const auto& den = denominators_[grid_index];
    Scalar total(0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (!(den(i) > Scalar(0))) return std::numeric_limits<Scalar>::infinity();
      const Scalar r = num(i) / den(i) - y(i);
      total += r * r;
    }
    return total;
  }

  /// argmin of loo over the grid; ties go to the smallest bandwidth, and a
  /// constant series returns the smallest bandwidth outright.
  template <typename Derived>
  Scalar select(const Eigen::MatrixBase<Derived>& y) const {
    check_length(y);
    if (y.minCoeff() == y.maxCoeff()) return grid_.front();
    std::size_t best = 0;
    Scalar best_loo = loo(y, 0);
    for (std::size_t g = 1; g < grid_.size(); ++g) {
      const Scalar v = loo(y, g);
      if (v < best_loo) {
        best_loo = v;
        best = g;
      }
    }
    return grid_[best];
  }

 private:
  template <typename Derived>
  void check_length(const Eigen::MatrixBase<Derived>& y) const {
    if (y.size() != length()) throw std::invalid_argument("series length does not match the selector");
  }

  std::vector<Scalar> grid_;
  std::vector<Matrix> weights_;
  std::vector<Series<Scalar>> denominators_;
};

/// One-shot bandwidth selection. Prefer LooBandwidthSelector for many series
/// of the same length.
template <typename Derived>
typename Derived::Scalar select_bandwidth_loo(const Eigen::MatrixBase<Derived>& y,
                                              const std::vector<typename Derived::Scalar>& h_grid) {
  return LooBandwidthSelector<typename Derived::Scalar>(y.size(), h_grid).select(y);
}

/// Trailing mean over exactly w points (fewer at the start, divided by the
/// number actually present). Clamped to the input range to absorb rounding.
template <typename Derived>
Series<typename Derived::Scalar> rolling_mean(const Eigen::MatrixBase<Derived>& y, int w) {
  using Scalar = typename Derived::Scalar;
  if (w < 1) throw std::invalid_argument("rolling window must be >= 1");
  const Eigen::Index n = y.size();
  Series<Scalar> out(n);
  if (n == 0) return out;
  const Scalar lo = y.minCoeff();
  const Scalar hi = y.maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index start = std::max<Eigen::Index>(0, k - w + 1);
    const Eigen::Index count = k - start + 1;
    out(k) = std::clamp(y.segment(start, count).sum() / Scalar(count), lo, hi);
  }
  return out;
}

/// Smallest integer W >= 1 with at least 90% of `values` strictly below W.
int quantile_window(std::vector<double> values);

/// Rolling-window width per nb_peaks group. Groups with fewer than 10
/// datasets, and nb_peaks values never seen, use the corpus-wide width.
struct WindowMap {
  std::map<int, int> by_nb_peaks;
  int global = 1;

  int width_for(int nb_peaks) const {
    const auto it = by_nb_peaks.find(nb_peaks);
    return it == by_nb_peaks.end() ? global : it->second;
  }
};

inline constexpr std::size_t kMinWindowGroupSize = 10;

WindowMap rolling_window_widths(const std::vector<FeatureVector>& corpus_features);

struct IntensityForecast {
  Eigen::VectorXd smoothed;
  Eigen::VectorXd rolling;
  double bandwidth_h = 0.0;
  int window_w = 1;
  double predicted_intensity = 0.0;
};

/// Full per-dataset forecast over the observation window.
class IntensityPredictor {
 public:
  IntensityPredictor(const SplitConfig& split, std::vector<double> h_grid, WindowMap windows);

  IntensityForecast predict(const DatasetRecord& record) const;

  /// Forecasts for every record; `threads` only changes wall time.
  std::vector<IntensityForecast> predict_all(const std::vector<DatasetRecord>& records, int threads = 1) const;

 private:
  SplitConfig split_;
  LooBandwidthSelector<double> selector_;
  WindowMap windows_;
};

IntensityForecast predict_intensity(const DatasetRecord& record, const SplitConfig& split,
                                    const std::vector<double>& h_grid, const WindowMap& window_map);

void write_intensity_dump(const std::vector<DatasetRecord>& records, const std::vector<IntensityForecast>& forecasts,
                          std::ostream& out);

}  // namespace tierplan
