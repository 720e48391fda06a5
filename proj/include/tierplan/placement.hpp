#pragma once

#include "tierplan/features.hpp"

#include <cmath>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tierplan {

/// Storage/miss cost model. Defaults are the pessimistic "disk is scarce"
/// setting: disk 100, tape 1, restore 2000 per GB.
struct CostParams {
  double c_disk = 100.0;
  double c_tape = 1.0;
  double c_miss = 2000.0;
  double alpha = 0.0;  // replica penalty weight on predicted intensity
  int max_replicas = 4;

  void validate() const;
};

struct PlacementDecision {
  std::string dataset_id;
  bool on_disk = true;
  int replicas = 1;  // 0 when removed
  bool miss = false;

  friend bool operator==(const PlacementDecision&, const PlacementDecision&) = default;
};

/// Threshold value used by plans that are not threshold-based (LRU).
inline constexpr double kNoThreshold = std::numeric_limits<double>::quiet_NaN();

/// Threshold above every popularity in [0, 1]: nothing is removed.
inline const double kKeepAllThreshold = std::nextafter(1.0, 2.0);

struct PlacementPlan {
  std::vector<PlacementDecision> decisions;
  double threshold = kNoThreshold;
  double total_loss = 0.0;

  std::size_t removed_count() const;
};

/// The integer r in [1, max_replicas] minimising r + alpha*I/r (ties to the
/// smaller r). Agrees with rounding sqrt(alpha*I) except on the narrow bands
/// where rounding picks the worse neighbour.
int optimal_replicas(double intensity, double alpha, int max_replicas);

/// Bracket term r + alpha*I/r of the disk cost.
inline double replica_cost(int replicas, double intensity, double alpha) {
  return replicas + alpha * intensity / replicas;
}

/// Storage/miss loss:
///   c_disk * sum S (Rp + alpha I / Rp) delta + c_tape * sum S (1 - delta) + c_miss * sum S m
/// with m = (1 - delta) * (1 - label): a miss is a removed dataset that is used later.
double loss(std::span<const PlacementDecision> decisions, std::span<const double> sizes,
            std::span<const double> intensities, std::span<const Label> labels, const CostParams& costs);

/// Searches the popularity threshold (datasets with popularity >= threshold
/// leave the disk) over every observed popularity plus 0 and just above 1,
/// with per-dataset optimal replicas for kept datasets. Exact: the loss is
/// piecewise constant between observed popularities. Ties prefer the larger
/// threshold.
PlacementPlan optimize_plan(std::span<const std::string> ids, std::span<const double> popularities,
                            std::span<const double> intensities, std::span<const double> sizes,
                            std::span<const Label> labels, const CostParams& costs);

/// Decisions for a fixed threshold.
std::vector<PlacementDecision> decisions_for_threshold(std::span<const std::string> ids,
                                                       std::span<const double> popularities,
                                                       std::span<const double> intensities,
                                                       std::span<const Label> labels, const CostParams& costs,
                                                       double threshold);

/// Plan CSV: dataset_id,popularity,predicted_intensity,on_disk,replicas,miss
void write_plan_csv(const PlacementPlan& plan, std::span<const double> popularities,
                    std::span<const double> intensities, std::ostream& out);

/// Summary JSON: {threshold, total_loss, datasets_removed, space_saved_gb}.
void write_plan_summary(const PlacementPlan& plan, double space_saved_gb, std::ostream& out);

/// Re-checks plan invariants; returns one message per violation.
std::vector<std::string> verify_plan(const PlacementPlan& plan, std::span<const double> popularities,
                                     std::span<const double> intensities, std::span<const double> sizes,
                                     std::span<const Label> labels, const CostParams& costs);

}  // namespace tierplan
