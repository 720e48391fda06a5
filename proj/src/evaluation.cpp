#include "tierplan/evaluation.hpp"

#include "csv_util.hpp"
#include "tierplan/parallel.hpp"
#include "tierplan/pipeline.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace tierplan {

void TimeParams::validate() const {
  if (!(t_disk >= 0.0) || !(t_tape >= 0.0) || !(k_tape >= 0.0))
    throw std::invalid_argument("time parameters must be non-negative");
}

void ComparisonGrids::validate() const {
  if (alpha.empty() || lru_n.empty() || max_replicas.empty()) throw std::invalid_argument("comparison grids must be nonempty");
  for (double a : alpha)
    if (!(a >= 0.0)) throw std::invalid_argument("alpha grid values must be >= 0");
  for (int r : max_replicas)
    if (r < 1) throw std::invalid_argument("max_replicas grid values must be >= 1");
  for (int n : lru_n)
    if (n < 1) throw std::invalid_argument("LRU window grid values must be >= 1");
}

double eval_intensity(const UsageHistory& history, const SplitConfig& split) {
  if (history.weeks() < split.total_weeks()) throw std::invalid_argument("usage history shorter than the split");
  return history.counts.segment(split.observation_weeks, split.label_weeks).sum() / split.label_weeks;
}

std::vector<double> eval_intensities(const std::vector<DatasetRecord>& records, const SplitConfig& split) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(eval_intensity(r.history, split));
  return out;
}

double downloading_time(std::span<const PlacementDecision> decisions, std::span<const double> sizes,
                        std::span<const double> eval_intensities, const TimeParams& time) {
  if (sizes.size() != decisions.size() || eval_intensities.size() != decisions.size())
    throw std::invalid_argument("downloading_time inputs are not aligned");
  double disk = 0.0, restore = 0.0, after_restore = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    const double use = eval_intensities[i];
    if (d.on_disk) {
      if (d.replicas < 1) throw std::invalid_argument("dataset " + d.dataset_id + " kept on disk with 0 replicas");
      disk += use * sizes[i] * time.t_disk * replica_access_factor(d.replicas);
    } else if (use > 0.0) {
      restore += time.k_tape + sizes[i] * time.t_tape;
      after_restore += use * sizes[i] * time.t_disk;
    }
  }
  return disk + restore + after_restore;
}

double baseline_time(const std::vector<DatasetRecord>& records, const SplitConfig& split, const TimeParams& time) {
  double total = 0.0;
  for (const auto& r : records)
    total += eval_intensity(r.history, split) * r.metadata.replica_size_gb * time.t_disk *
             replica_access_factor(r.metadata.replicas_on_disk);
  return total;
}

PlacementPlan lru_plan(const std::vector<DatasetRecord>& records, const SplitConfig& split, int n_weeks) {
  if (n_weeks < 1 || n_weeks > split.observation_weeks)
    throw std::invalid_argument("LRU window must lie in [1, observation_weeks]");
  PlacementPlan plan;
  plan.threshold = kNoThreshold;
  plan.total_loss = std::numeric_limits<double>::quiet_NaN();
  plan.decisions.reserve(records.size());
  for (const auto& r : records) {
    const auto recent = r.history.counts.segment(split.observation_weeks - n_weeks, n_weeks);
    PlacementDecision d;
    d.dataset_id = r.id();
    d.on_disk = (recent.array() > 0.0).any();
    d.replicas = d.on_disk ? r.metadata.replicas_on_disk : 0;
    d.miss = !d.on_disk && eval_intensity(r.history, split) > 0.0;
    plan.decisions.push_back(std::move(d));
  }
  return plan;
}

EvalReport evaluate_policy(const PlacementPlan& plan, const std::vector<DatasetRecord>& records,
                           const SplitConfig& split, const TimeParams& time) {
  if (plan.decisions.size() != records.size()) throw std::invalid_argument("plan does not cover every record");
  const double base = baseline_time(records, split, time);
  if (!(base > 0.0)) throw std::domain_error("baseline downloading time is zero; ratio undefined");

  std::vector<double> sizes, used;
  sizes.reserve(records.size());
  double original_gb = 0.0, planned_gb = 0.0;
  EvalReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& m = records[i].metadata;
    const auto& d = plan.decisions[i];
    if (d.dataset_id != m.dataset_id) throw std::invalid_argument("plan order does not match the records");
    sizes.push_back(m.replica_size_gb);
    used.push_back(eval_intensity(records[i].history, split));
    original_gb += m.replica_size_gb * m.replicas_on_disk;
    if (d.on_disk) planned_gb += m.replica_size_gb * d.replicas;
    if (!d.on_disk) {
      ++report.removed;
      if (used.back() > 0.0) ++report.wrong_removals;
    }
  }
  report.saving_space_pct = 100.0 * (original_gb - planned_gb) / original_gb;
  report.downloading_time_ratio = downloading_time(plan.decisions, sizes, used, time) / base;
  return report;
}

std::vector<DatasetRecord> comparison_subset(const std::vector<DatasetRecord>& records, const SplitConfig& split) {
  std::vector<DatasetRecord> out;
  for (const auto& r : records) {
    const auto& m = r.metadata;
    if (m.creation_week <= split.observation_weeks && m.first_usage_week >= 1 &&
        m.first_usage_week <= split.observation_weeks)
      out.push_back(r);
  }
  return out;
}

std::vector<ComparisonRow> comparison_report(const std::vector<DatasetRecord>& all_records,
                                             const PipelineConfig& config, const CostParams& costs,
                                             const TimeParams& time, const ComparisonGrids& grids) {
  grids.validate();
  costs.validate();
  time.validate();
  const auto records = comparison_subset(all_records, config.split);
  const ScoredCorpus scored = score_corpus(records, config);

  struct Job {
    bool lru;
    double param;
    int max_replicas;
  };
  std::vector<Job> jobs;
  for (int r : grids.max_replicas)
    for (double a : grids.alpha) jobs.push_back({false, a, r});
  for (int n : grids.lru_n) jobs.push_back({true, static_cast<double>(n), 0});

  std::vector<ComparisonRow> rows(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t k) {
    const auto& job = jobs[k];
    auto& row = rows[k];
    row.param = job.param;
    if (job.lru) {
      row.policy = "lru";
      const auto report = evaluate_policy(lru_plan(records, config.split, static_cast<int>(job.param)), records,
                                          config.split, time);
      row.downloading_time_ratio = report.downloading_time_ratio;
      row.saving_space_pct = report.saving_space_pct;
      row.wrong_removals = report.wrong_removals;
      return;
    }
    CostParams c = costs;
    c.alpha = job.param;
    c.max_replicas = job.max_replicas;
    const auto plan = optimize_scored(scored, c);
    const auto report = evaluate_policy(plan, records, config.split, time);
    row.policy = "optimizer";
    row.max_replicas = job.max_replicas;
    row.downloading_time_ratio = report.downloading_time_ratio;
    row.saving_space_pct = report.saving_space_pct;
    row.wrong_removals = report.wrong_removals;
    row.total_loss = plan.total_loss;
  });
  return rows;
}

void write_report_csv(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  out << "policy,param,max_replicas,downloading_time_ratio,saving_space_pct,wrong_removals,total_loss\n";
  for (const auto& r : rows) {
    out << r.policy << ',' << csv::format_real(r.param) << ','
        << (r.max_replicas ? std::to_string(*r.max_replicas) : std::string()) << ','
        << csv::format_real(r.downloading_time_ratio) << ',' << csv::format_real(r.saving_space_pct) << ','
        << r.wrong_removals << ',' << (r.total_loss ? csv::format_real(*r.total_loss) : std::string()) << '\n';
  }
}

void write_report_text(const std::vector<ComparisonRow>& rows, std::ostream& out) {
  auto table = [&](const std::string& title, const std::string& param_name, auto&& keep) {
    out << title << '\n';
    out << std::left << std::setw(10) << param_name << std::setw(26) << "Downloading time ratio" << std::setw(19)
        << "Saving space, %" << "Nb of wrong removings\n";
    for (const auto& r : rows) {
      if (!keep(r)) continue;
      out << std::left << std::setw(10) << csv::format_real(r.param) << std::setw(26)
          << csv::format_fixed(r.downloading_time_ratio, 2) << std::setw(19) << csv::format_fixed(r.saving_space_pct, 0)
          << r.wrong_removals << '\n';
    }
    out << '\n';
  };

  std::vector<int> replica_limits;
  for (const auto& r : rows)
    if (r.max_replicas && std::find(replica_limits.begin(), replica_limits.end(), *r.max_replicas) == replica_limits.end())
      replica_limits.push_back(*r.max_replicas);

  if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.policy == "lru"; }))
    table("LRU", "N", [](const ComparisonRow& r) { return r.policy == "lru"; });
  for (int limit : replica_limits)
    table("Optimizer, max replicas " + std::to_string(limit), "Alpha",
          [limit](const ComparisonRow& r) { return r.policy == "optimizer" && r.max_replicas == limit; });
}

}  // namespace tierplan
