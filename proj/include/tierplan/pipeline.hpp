#pragma once

#include "tierplan/catalog.hpp"
#include "tierplan/evaluation.hpp"
#include "tierplan/features.hpp"
#include "tierplan/gbdt.hpp"
#include "tierplan/intensity.hpp"
#include "tierplan/placement.hpp"
#include "tierplan/popularity.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tierplan {

/// Everything needed to score a corpus. Stage seeds derive from `seed`:
/// derive_seed(seed, "halves") for the fold split, derive_seed(seed, "gbdt")
/// for the classifier.
struct PipelineConfig {
  SplitConfig split;
  GbdtConfig gbdt;
  std::vector<double> h_grid = default_bandwidth_grid();
  std::uint64_t seed = 42;
  int threads = 1;
};

/// Per-dataset outputs of the popularity and intensity stages, aligned with
/// the input records.
struct ScoredCorpus {
  std::vector<std::string> ids;
  std::vector<FeatureVector> features;
  std::vector<Label> labels;
  std::vector<double> sizes;
  CrossPrediction cross;
  CalibrationMap calibration;
  std::vector<double> popularity;
  WindowMap windows;
  std::vector<IntensityForecast> forecasts;
  std::vector<double> intensity;
};

ScoredCorpus score_corpus(const std::vector<DatasetRecord>& records, const PipelineConfig& config);

PlacementPlan optimize_scored(const ScoredCorpus& scored, const CostParams& costs);

/// Space released on disk by `plan` relative to catalogue replica counts, GB.
double space_saved_gb(const PlacementPlan& plan, const std::vector<DatasetRecord>& records);

/// Serializable run configuration (JSON). Command-line flags override it.
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir = ".";
  PipelineConfig pipeline;
  CostParams costs;
  TimeParams times;
  ComparisonGrids grids;

  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

}  // namespace tierplan
