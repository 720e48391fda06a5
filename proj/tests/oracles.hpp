#pragma once

// Slow, direct reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

// Kernel-weighted mean at week x (1-based) over the points whose indices are
// not excluded.
inline double nw_at(const std::vector<double>& y, double h, std::size_t x, std::size_t skip) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j == skip) continue;
    const double d = static_cast<double>(x) - static_cast<double>(j);
    const double k = std::exp(-(d * d) / (2.0 * h * h));
    num += y[j] * k;
    den += k;
  }
  return num / den;
}

inline std::vector<double> nw_smooth(const std::vector<double>& y, double h) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = nw_at(y, h, i, y.size());
  return out;
}

inline double loo(const std::vector<double>& y, double h) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = nw_at(y, h, i, i) - y[i];
    total += r * r;
  }
  return total;
}

inline std::vector<double> rolling_mean(const std::vector<double>& y, int w) {
  std::vector<double> out;
  for (std::size_t k = 0; k < y.size(); ++k) {
    double s = 0.0;
    int count = 0;
    for (int i = static_cast<int>(k); i >= 0 && count < w; --i, ++count) s += y[i];
    out.push_back(s / count);
  }
  return out;
}

struct Item {
  double popularity;
  double intensity;
  double size;
  int label;  // 1 = never used again
};

struct Costs {
  double c_disk = 100.0, c_tape = 1.0, c_miss = 2000.0, alpha = 0.0;
  int max_replicas = 4;
};

// Loss of one dataset kept with r replicas or removed.
inline double kept_cost(const Item& it, int r, const Costs& c) {
  return c.c_disk * it.size * (r + c.alpha * it.intensity / r);
}

inline double removed_cost(const Item& it, const Costs& c) {
  return c.c_tape * it.size + (it.label == 0 ? c.c_miss * it.size : 0.0);
}

inline double best_kept_cost(const Item& it, const Costs& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= c.max_replicas; ++r) best = std::min(best, kept_cost(it, r, c));
  return best;
}

// Minimum loss over every removal set of the form {popularity >= t}, found by
// enumerating all 2^n subsets and discarding those no threshold can produce.
inline double brute_force_min_loss(const std::vector<Item>& items, const Costs& c) {
  const std::size_t n = items.size();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    double lowest_removed = std::numeric_limits<double>::infinity();
    double highest_kept = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1UL)
        lowest_removed = std::min(lowest_removed, items[i].popularity);
      else
        highest_kept = std::max(highest_kept, items[i].popularity);
    }
    if (highest_kept >= lowest_removed) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      total += (mask >> i & 1UL) ? removed_cost(items[i], c) : best_kept_cost(items[i], c);
    best = std::min(best, total);
  }
  return best;
}

// Download time of one dataset.
inline double time_kept(double use, double size, int replicas, double t_disk) {
  return use * size * t_disk * (0.05 + 1.0 / replicas);
}

inline double time_removed(double use, double size, double t_disk, double t_tape, double k_tape) {
  if (use <= 0.0) return 0.0;
  return k_tape + size * t_tape + use * size * t_disk;
}

// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
inline double ks_uniform(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max(d, (i + 1) / n - x[i]);
    d = std::max(d, x[i] - i / n);
  }
  return d;
}

// Pairwise AUC: fraction of (positive, negative) pairs ordered correctly.
inline double auc(const std::vector<double>& score, const std::vector<int>& label) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < score.size(); ++i)
    for (std::size_t j = 0; j < score.size(); ++j) {
      if (label[i] != 1 || label[j] != 0) continue;
      pairs += 1.0;
      if (score[i] > score[j]) good += 1.0;
      else if (score[i] == score[j]) good += 0.5;
    }
  return good / pairs;
}

}  // namespace oracle
