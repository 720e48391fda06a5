#include "tierplan/placement.hpp"

#include "csv_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tierplan {

namespace {

void require_aligned(std::size_t n, std::initializer_list<std::size_t> sizes) {
  for (auto s : sizes)
    if (s != n) throw std::invalid_argument("placement inputs are not aligned");
}

}  // namespace

void CostParams::validate() const {
  if (!(c_disk >= 0.0) || !(c_tape >= 0.0) || !(c_miss >= 0.0))
    throw std::invalid_argument("cost parameters must be non-negative");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be non-negative");
  if (max_replicas < 1) throw std::invalid_argument("max_replicas must be >= 1");
}

std::size_t PlacementPlan::removed_count() const {
  return static_cast<std::size_t>(
      std::count_if(decisions.begin(), decisions.end(), [](const auto& d) { return !d.on_disk; }));
}

int optimal_replicas(double intensity, double alpha, int max_replicas) {
  if (!(intensity >= 0.0) || !(alpha >= 0.0)) throw std::invalid_argument("intensity and alpha must be >= 0");
  if (max_replicas < 1) throw std::invalid_argument("max_replicas must be >= 1");
  const double root = std::sqrt(alpha * intensity);
  if (root >= max_replicas) return max_replicas;
  const int lower = std::clamp(static_cast<int>(std::floor(root)), 1, max_replicas);
  const int upper = std::min(lower + 1, max_replicas);
  return replica_cost(upper, intensity, alpha) < replica_cost(lower, intensity, alpha) ? upper : lower;
}

double loss(std::span<const PlacementDecision> decisions, std::span<const double> sizes,
            std::span<const double> intensities, std::span<const Label> labels, const CostParams& costs) {
  require_aligned(decisions.size(), {sizes.size(), intensities.size(), labels.size()});
  double disk = 0.0, tape = 0.0, miss = 0.0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const auto& d = decisions[i];
    if (d.on_disk) {
      if (d.replicas < 1) throw std::invalid_argument("dataset " + d.dataset_id + " kept on disk with 0 replicas");
      disk += sizes[i] * replica_cost(d.replicas, intensities[i], costs.alpha);
    } else {
      tape += sizes[i];
      if (labels[i] == Label::Popular) miss += sizes[i];
    }
  }
  return costs.c_disk * disk + costs.c_tape * tape + costs.c_miss * miss;
}

std::vector<PlacementDecision> decisions_for_threshold(std::span<const std::string> ids,
                                                       std::span<const double> popularities,
                                                       std::span<const double> intensities,
                                                       std::span<const Label> labels, const CostParams& costs,
                                                       double threshold) {
  require_aligned(ids.size(), {popularities.size(), intensities.size(), labels.size()});
  std::vector<PlacementDecision> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& d = out[i];
    d.dataset_id = ids[i];
    d.on_disk = popularities[i] < threshold;
    d.replicas = d.on_disk ? optimal_replicas(intensities[i], costs.alpha, costs.max_replicas) : 0;
    d.miss = !d.on_disk && labels[i] == Label::Popular;
  }
  return out;
}

PlacementPlan optimize_plan(std::span<const std::string> ids, std::span<const double> popularities,
                            std::span<const double> intensities, std::span<const double> sizes,
                            std::span<const Label> labels, const CostParams& costs) {
  costs.validate();
  const std::size_t n = ids.size();
  require_aligned(n, {popularities.size(), intensities.size(), sizes.size(), labels.size()});
  for (double p : popularities)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("popularity outside [0, 1]");

  std::vector<double> candidates(popularities.begin(), popularities.end());
  candidates.push_back(0.0);
  candidates.push_back(kKeepAllThreshold);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Sweep: loss(t) = c_disk * (keep cost of pop < t) + removal cost of pop >= t.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return popularities[a] < popularities[b]; });
  std::vector<double> keep_prefix(n + 1, 0.0), tape_suffix(n + 1, 0.0), miss_suffix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = order[k];
    const int r = optimal_replicas(intensities[i], costs.alpha, costs.max_replicas);
    keep_prefix[k + 1] = keep_prefix[k] + sizes[i] * replica_cost(r, intensities[i], costs.alpha);
  }
  for (std::size_t k = n; k-- > 0;) {
    const auto i = order[k];
    tape_suffix[k] = tape_suffix[k + 1] + sizes[i];
    miss_suffix[k] = miss_suffix[k + 1] + (labels[i] == Label::Popular ? sizes[i] : 0.0);
  }
  std::vector<double> approx(candidates.size());
  std::size_t split = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    while (split < n && popularities[order[split]] < candidates[c]) ++split;
    approx[c] = costs.c_disk * keep_prefix[split] + costs.c_tape * tape_suffix[split] +
                costs.c_miss * miss_suffix[split];
  }
  const double approx_min = *std::min_element(approx.begin(), approx.end());
  const double slack = 1e-9 * std::max(1.0, std::abs(approx_min));

  // Re-evaluate the near-optimal candidates exactly so the reported loss is
  // the loss of the returned decisions, term for term.
  PlacementPlan best;
  bool have_best = false;
  for (std::size_t c = candidates.size(); c-- > 0;) {
    if (approx[c] > approx_min + slack) continue;
    auto decisions = decisions_for_threshold(ids, popularities, intensities, labels, costs, candidates[c]);
    const double value = loss(decisions, sizes, intensities, labels, costs);
    if (!have_best || value < best.total_loss) {
      best.decisions = std::move(decisions);
      best.threshold = candidates[c];
      best.total_loss = value;
      have_best = true;
    }
  }
  return best;
}

void write_plan_csv(const PlacementPlan& plan, std::span<const double> popularities,
                    std::span<const double> intensities, std::ostream& out) {
  require_aligned(plan.decisions.size(), {popularities.size(), intensities.size()});
  out << "dataset_id,popularity,predicted_intensity,on_disk,replicas,miss\n";
  for (std::size_t i = 0; i < plan.decisions.size(); ++i) {
    const auto& d = plan.decisions[i];
    out << csv::quote(d.dataset_id) << ',' << csv::format_real(popularities[i]) << ','
        << csv::format_real(intensities[i]) << ',' << (d.on_disk ? 1 : 0) << ',' << d.replicas << ','
        << (d.miss ? 1 : 0) << '\n';
  }
}

void write_plan_summary(const PlacementPlan& plan, double space_saved_gb, std::ostream& out) {
  nlohmann::ordered_json j;
  j["threshold"] = std::isnan(plan.threshold) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(plan.threshold);
  j["total_loss"] = plan.total_loss;
  j["datasets_removed"] = plan.removed_count();
  j["space_saved_gb"] = space_saved_gb;
  out << j.dump(1) << '\n';
}

std::vector<std::string> verify_plan(const PlacementPlan& plan, std::span<const double> popularities,
                                     std::span<const double> intensities, std::span<const double> sizes,
                                     std::span<const Label> labels, const CostParams& costs) {
  std::vector<std::string> problems;
  const std::size_t n = plan.decisions.size();
  if (popularities.size() != n || intensities.size() != n || sizes.size() != n || labels.size() != n) {
    problems.push_back("plan does not cover the inputs");
    return problems;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = plan.decisions[i];
    const std::string who = "dataset " + d.dataset_id + ": ";
    if (!std::isnan(plan.threshold) && d.on_disk != (popularities[i] < plan.threshold))
      problems.push_back(who + "placement inconsistent with threshold");
    if (d.on_disk && (d.replicas < 1 || d.replicas > costs.max_replicas))
      problems.push_back(who + "replica count outside [1, max_replicas]");
    if (!d.on_disk && d.replicas != 0) problems.push_back(who + "removed dataset keeps replicas");
    if (d.miss != (!d.on_disk && labels[i] == Label::Popular)) problems.push_back(who + "miss flag inconsistent");
    if (d.on_disk && d.replicas >= 1) {
      const double here = replica_cost(d.replicas, intensities[i], costs.alpha);
      if (d.replicas > 1 && replica_cost(d.replicas - 1, intensities[i], costs.alpha) < here)
        problems.push_back(who + "fewer replicas would be cheaper");
      if (d.replicas < costs.max_replicas && replica_cost(d.replicas + 1, intensities[i], costs.alpha) < here)
        problems.push_back(who + "more replicas would be cheaper");
    }
  }
  if (problems.empty()) {
    const double recomputed = loss(plan.decisions, sizes, intensities, labels, costs);
    if (std::abs(recomputed - plan.total_loss) > 1e-9 * std::max(1.0, std::abs(recomputed)))
      problems.push_back("total_loss does not match the recomputed loss");
  }
  return problems;
}

}  // namespace tierplan
