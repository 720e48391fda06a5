#include "tierplan/pipeline.hpp"

#include "tierplan/random.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tierplan {

ScoredCorpus score_corpus(const std::vector<DatasetRecord>& records, const PipelineConfig& config) {
  config.split.validate();
  validate_records(records, config.split.total_weeks());

  ScoredCorpus s;
  s.features = extract_all(records, config.split);
  for (std::size_t i = 0; i < records.size(); ++i) {
    s.ids.push_back(records[i].id());
    s.labels.push_back(s.features[i].label);
    s.sizes.push_back(records[i].metadata.replica_size_gb);
  }

  GbdtConfig gbdt = config.gbdt;
  gbdt.seed = derive_seed(config.seed, "gbdt");
  s.cross = cross_predict(records, s.features, derive_seed(config.seed, "halves"), gbdt, config.threads);
  s.calibration = fit_calibration(s.cross.probability, s.features);
  s.popularity.reserve(records.size());
  for (Eigen::Index i = 0; i < s.cross.probability.size(); ++i)
    s.popularity.push_back(popularity(s.calibration, s.cross.probability(i)));

  s.windows = rolling_window_widths(s.features);
  s.forecasts = IntensityPredictor(config.split, config.h_grid, s.windows).predict_all(records, config.threads);
  s.intensity.reserve(records.size());
  for (const auto& f : s.forecasts) s.intensity.push_back(f.predicted_intensity);
  return s;
}

PlacementPlan optimize_scored(const ScoredCorpus& scored, const CostParams& costs) {
  return optimize_plan(scored.ids, scored.popularity, scored.intensity, scored.sizes, scored.labels, costs);
}

double space_saved_gb(const PlacementPlan& plan, const std::vector<DatasetRecord>& records) {
  if (plan.decisions.size() != records.size()) throw std::invalid_argument("plan does not cover every record");
  double saved = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& m = records[i].metadata;
    const int kept = plan.decisions[i].on_disk ? plan.decisions[i].replicas : 0;
    saved += m.replica_size_gb * (m.replicas_on_disk - kept);
  }
  return saved;
}

// ---- configuration -----------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("unknown config key '" + where + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  pipeline.split.validate();
  pipeline.gbdt.validate();
  if (pipeline.h_grid.empty()) throw std::invalid_argument("bandwidth grid must be nonempty");
  for (double h : pipeline.h_grid)
    if (!(h > 0.0) || h > kMaxBandwidthWeeks) throw std::invalid_argument("bandwidth grid values must lie in (0, 30]");
  if (pipeline.threads < 1) throw std::invalid_argument("threads must be >= 1");
  costs.validate();
  times.validate();
  grids.validate();
  for (int n : grids.lru_n)
    if (n > pipeline.split.observation_weeks) throw std::invalid_argument("LRU window exceeds the observation window");
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  try {
    const json j = json::parse(text);
    reject_unknown(j, {"input", "output_dir", "seed", "threads", "split", "gbdt", "costs", "times", "grids"}, "");
    if (j.contains("input")) c.input = j.at("input").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    read(j, "seed", c.pipeline.seed);
    read(j, "threads", c.pipeline.threads);
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, {"observation_weeks", "label_weeks"}, "split.");
      read(s, "observation_weeks", c.pipeline.split.observation_weeks);
      read(s, "label_weeks", c.pipeline.split.label_weeks);
    }
    if (j.contains("gbdt")) {
      const auto& g = j.at("gbdt");
      reject_unknown(g, {"n_trees", "max_depth", "learning_rate", "min_samples_leaf"}, "gbdt.");
      read(g, "n_trees", c.pipeline.gbdt.n_trees);
      read(g, "max_depth", c.pipeline.gbdt.max_depth);
      read(g, "learning_rate", c.pipeline.gbdt.learning_rate);
      read(g, "min_samples_leaf", c.pipeline.gbdt.min_samples_leaf);
    }
    if (j.contains("costs")) {
      const auto& k = j.at("costs");
      reject_unknown(k, {"c_disk", "c_tape", "c_miss", "alpha", "max_replicas"}, "costs.");
      read(k, "c_disk", c.costs.c_disk);
      read(k, "c_tape", c.costs.c_tape);
      read(k, "c_miss", c.costs.c_miss);
      read(k, "alpha", c.costs.alpha);
      read(k, "max_replicas", c.costs.max_replicas);
    }
    if (j.contains("times")) {
      const auto& t = j.at("times");
      reject_unknown(t, {"t_disk", "t_tape", "k_tape"}, "times.");
      read(t, "t_disk", c.times.t_disk);
      read(t, "t_tape", c.times.t_tape);
      read(t, "k_tape", c.times.k_tape);
    }
    if (j.contains("grids")) {
      const auto& g = j.at("grids");
      reject_unknown(g, {"alpha", "lru_n", "max_replicas", "h"}, "grids.");
      read(g, "alpha", c.grids.alpha);
      read(g, "lru_n", c.grids.lru_n);
      read(g, "max_replicas", c.grids.max_replicas);
      read(g, "h", c.pipeline.h_grid);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return run_config_from_json(buf.str());
}

std::string run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input.string();
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.pipeline.seed;
  j["threads"] = c.pipeline.threads;
  j["split"] = {{"observation_weeks", c.pipeline.split.observation_weeks},
                {"label_weeks", c.pipeline.split.label_weeks}};
  j["gbdt"] = {{"n_trees", c.pipeline.gbdt.n_trees},
               {"max_depth", c.pipeline.gbdt.max_depth},
               {"learning_rate", c.pipeline.gbdt.learning_rate},
               {"min_samples_leaf", c.pipeline.gbdt.min_samples_leaf}};
  j["costs"] = {{"c_disk", c.costs.c_disk},
                {"c_tape", c.costs.c_tape},
                {"c_miss", c.costs.c_miss},
                {"alpha", c.costs.alpha},
                {"max_replicas", c.costs.max_replicas}};
  j["times"] = {{"t_disk", c.times.t_disk}, {"t_tape", c.times.t_tape}, {"k_tape", c.times.k_tape}};
  j["grids"] = {{"alpha", c.grids.alpha},
                {"lru_n", c.grids.lru_n},
                {"max_replicas", c.grids.max_replicas},
                {"h", c.pipeline.h_grid}};
  return j.dump(2) + "\n";
}

}  // namespace tierplan
