#pragma once

#include "tierplan/catalog.hpp"
#include "tierplan/placement.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tierplan {

/// Access-time model: hours per GB from disk, hours per GB tape to disk, and
/// a fixed restore latency in hours.
struct TimeParams {
  double t_disk = 0.1;
  double t_tape = 3.0;
  double k_tape = 24.0;

  void validate() const;
};

/// Disk access slowdown for a dataset with `replicas` copies: 0.05 + 1/Rp.
inline double replica_access_factor(int replicas) { return 0.05 + 1.0 / replicas; }

/// Mean weekly usage over the label window.
double eval_intensity(const UsageHistory& history, const SplitConfig& split);

std::vector<double> eval_intensities(const std::vector<DatasetRecord>& records, const SplitConfig& split);

/// Total download time in hours:
///   sum I* S t_disk (0.05 + 1/Rp) delta + sum (K_tape + S t_tape) m + sum I* S t_disk m
/// where m marks removed datasets that are used in the label window (I* > 0).
double downloading_time(std::span<const PlacementDecision> decisions, std::span<const double> sizes,
                        std::span<const double> eval_intensities, const TimeParams& time);

/// Download time with every dataset on disk at its catalogue replica count.
double baseline_time(const std::vector<DatasetRecord>& records, const SplitConfig& split, const TimeParams& time);

/// Remove every dataset unused during the last `n_weeks` observation weeks;
/// kept datasets keep their catalogue replica counts.
PlacementPlan lru_plan(const std::vector<DatasetRecord>& records, const SplitConfig& split, int n_weeks);

struct EvalReport {
  double downloading_time_ratio = 0.0;
  double saving_space_pct = 0.0;  // negative when the plan adds disk replicas overall
  int wrong_removals = 0;
  int removed = 0;
  std::string policy_name;
  double policy_param = 0.0;
};

/// Scores `plan` against what actually happened in the label window.
EvalReport evaluate_policy(const PlacementPlan& plan, const std::vector<DatasetRecord>& records,
                           const SplitConfig& split, const TimeParams& time);

/// Datasets created and first used inside the observation window.
std::vector<DatasetRecord> comparison_subset(const std::vector<DatasetRecord>& records, const SplitConfig& split);

struct ComparisonRow {
  std::string policy;  // "optimizer" or "lru"
  double param = 0.0;  // alpha or N
  std::optional<int> max_replicas;
  double downloading_time_ratio = 0.0;
  double saving_space_pct = 0.0;
  int wrong_removals = 0;
  std::optional<double> total_loss;
};

struct ComparisonGrids {
  std::vector<double> alpha = {0.0, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0};
  std::vector<int> lru_n = {1, 2, 5, 10, 15, 20, 25};
  std::vector<int> max_replicas = {4, 7};

  void validate() const;
};

struct PipelineConfig;

/// Optimizer rows for every (max_replicas, alpha) pair, in grid order, then
/// one LRU row per N. Deterministic for any thread count.
std::vector<ComparisonRow> comparison_report(const std::vector<DatasetRecord>& records, const PipelineConfig& config,
                                             const CostParams& costs, const TimeParams& time,
                                             const ComparisonGrids& grids);

void write_report_csv(const std::vector<ComparisonRow>& rows, std::ostream& out);
void write_report_text(const std::vector<ComparisonRow>& rows, std::ostream& out);

}  // namespace tierplan
