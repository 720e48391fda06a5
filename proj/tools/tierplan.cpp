// tierplan: disk/tape placement recommendations from dataset usage history.
//
//   tierplan generate  --n 7375 --seed 42 --out corpus.csv
//   tierplan features  --input corpus.csv --out out/
//   tierplan recommend --input corpus.csv --out out/ --verify
//   tierplan compare   --config run.json --threads 4
//
// Exit codes: 0 success, 1 pipeline failure, 2 usage or I/O error.

#include "tierplan/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <system_error>

namespace fs = std::filesystem;
using namespace tierplan;

namespace {

constexpr int kPipelineFailure = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::string input;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string format;
  bool verify = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_input = true) {
  cmd->add_option("--config", o.config, "JSON run configuration; flags override it")->check(CLI::ExistingFile);
  if (with_input) cmd->add_option("--input", o.input, "catalogue file (CSV or JSON)");
  cmd->add_option("--out", o.out, "output directory (file for generate)");
  cmd->add_option("--seed", o.seed, "top-level seed");
  cmd->add_option("--threads", o.threads, "worker threads; output does not depend on it")->check(CLI::PositiveNumber);
  cmd->add_option("--format", o.format, "catalogue format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--verify", o.verify, "re-check output invariants and fail loudly");
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig c;
  c.costs.alpha = 0.01;
  if (!o.config.empty()) {
    try {
      c = load_run_config(o.config);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (!o.input.empty()) c.input = o.input;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) c.pipeline.seed = *o.seed;
  if (o.threads) c.pipeline.threads = *o.threads;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (c.input.empty()) throw UsageError("no input catalogue given (--input or config 'input')");
  if (!fs::exists(c.input)) throw UsageError("input catalogue not found: " + c.input.string());
  return c;
}

std::vector<DatasetRecord> load(const RunConfig& c, const CommonOptions& o) {
  const auto format = o.format.empty() ? format_from_path(c.input) : format_from_string(o.format);
  return parse_catalog(c.input, format, c.pipeline.split.total_weeks());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::system_error(ec, "cannot create output directory " + dir.string());
}

int cmd_generate(int n, double cold_fraction, const CommonOptions& o) {
  if (n < 1) throw UsageError("--n must be >= 1");
  if (o.out.empty()) throw UsageError("generate needs --out <file>");
  const std::uint64_t seed = o.seed.value_or(42);
  PopularMixConfig mix{cold_fraction, 1.0 - cold_fraction};
  try {
    mix.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto format = o.format.empty() ? format_from_path(o.out) : format_from_string(o.format);
  const auto records = generate_synthetic_corpus(n, seed, mix);
  write_catalog(records, fs::path(o.out), format);
  if (o.verify && parse_catalog(fs::path(o.out), format) != records) {
    std::cerr << "verify: written catalogue does not parse back to the generated corpus\n";
    return kPipelineFailure;
  }
  std::cout << "wrote " << records.size() << " datasets to " << o.out << '\n';
  return 0;
}

int cmd_features(const CommonOptions& o) {
  const auto c = resolve(o);
  const auto records = load(c, o);
  ensure_dir(c.output_dir);
  const auto features = extract_all(records, c.pipeline.split);
  {
    auto out = open_out(c.output_dir / "features.csv");
    write_feature_dump(records, features, out);
  }
  const auto windows = rolling_window_widths(features);
  const auto forecasts =
      IntensityPredictor(c.pipeline.split, c.pipeline.h_grid, windows).predict_all(records, c.pipeline.threads);
  {
    auto out = open_out(c.output_dir / "intensity.csv");
    write_intensity_dump(records, forecasts, out);
  }
  if (o.verify) {
    for (const auto& f : forecasts)
      if (!(f.predicted_intensity >= 0.0) || f.rolling.minCoeff() < 0.0) {
        std::cerr << "verify: negative intensity forecast\n";
        return kPipelineFailure;
      }
  }
  std::cout << "wrote features and intensity forecasts for " << records.size() << " datasets to "
            << c.output_dir.string() << '\n';
  return 0;
}

int cmd_recommend(const CommonOptions& o, std::optional<double> alpha, std::optional<int> max_replicas) {
  auto c = resolve(o);
  if (alpha) c.costs.alpha = *alpha;
  if (max_replicas) c.costs.max_replicas = *max_replicas;
  try {
    c.costs.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto records = load(c, o);
  ensure_dir(c.output_dir);

  const auto scored = score_corpus(records, c.pipeline);
  const auto plan = optimize_scored(scored, c.costs);
  {
    auto out = open_out(c.output_dir / "plan.csv");
    write_plan_csv(plan, scored.popularity, scored.intensity, out);
  }
  {
    auto out = open_out(c.output_dir / "summary.json");
    write_plan_summary(plan, space_saved_gb(plan, records), out);
  }
  {
    auto out = open_out(c.output_dir / "intensity.csv");
    write_intensity_dump(records, scored.forecasts, out);
  }
  for (int f = 0; f < 2; ++f) {
    auto out = open_out(c.output_dir / (f == 0 ? "model_a.json" : "model_b.json"));
    save_model(scored.cross.models[f], out);
  }
  {
    auto out = open_out(c.output_dir / "calibration.json");
    save_calibration(scored.calibration, out);
  }

  if (o.verify) {
    const auto problems = verify_plan(plan, scored.popularity, scored.intensity, scored.sizes, scored.labels, c.costs);
    for (const auto& p : problems) std::cerr << "verify: " << p << '\n';
    if (!problems.empty()) return kPipelineFailure;
  }
  std::cout << "threshold " << plan.threshold << ", " << plan.removed_count() << " of " << records.size()
            << " datasets leave disk, loss " << plan.total_loss << '\n';
  return 0;
}

int cmd_compare(const CommonOptions& o) {
  const auto c = resolve(o);
  const auto records = load(c, o);
  ensure_dir(c.output_dir);
  const auto rows = comparison_report(records, c.pipeline, c.costs, c.times, c.grids);
  {
    auto out = open_out(c.output_dir / "report.csv");
    write_report_csv(rows, out);
  }
  {
    auto out = open_out(c.output_dir / "report.txt");
    write_report_text(rows, out);
  }
  if (o.verify) {
    for (const auto& r : rows)
      if (r.wrong_removals < 0 || !(r.downloading_time_ratio > 0.0)) {
        std::cerr << "verify: invalid report row for " << r.policy << ' ' << r.param << '\n';
        return kPipelineFailure;
      }
  }
  write_report_text(rows, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disk/tape placement recommendations from dataset usage history"};
  app.require_subcommand(1);

  CommonOptions gen_opts, feat_opts, rec_opts, cmp_opts;
  int n = 0;
  double cold_fraction = 0.5;
  auto* gen = app.add_subcommand("generate", "write a seeded synthetic catalogue");
  gen->add_option("--n", n, "number of datasets (>= 1)")->required();
  gen->add_option("--cold-fraction", cold_fraction,
                  "fraction of datasets unused in the label window (default 0.5, i.e. a 50/50 mix)");
  add_common(gen, gen_opts, false);

  auto* feat = app.add_subcommand("features", "dump shape features and intensity forecasts");
  add_common(feat, feat_opts);

  std::optional<double> alpha;
  std::optional<int> max_replicas;
  auto* rec = app.add_subcommand("recommend", "compute a placement plan");
  add_common(rec, rec_opts);
  rec->add_option("--alpha", alpha, "replica penalty weight");
  rec->add_option("--max-replicas", max_replicas, "upper bound on disk replicas");

  auto* cmp = app.add_subcommand("compare", "compare the optimizer with LRU over parameter grids");
  add_common(cmp, cmp_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_generate(n, cold_fraction, gen_opts);
    if (feat->parsed()) return cmd_features(feat_opts);
    if (rec->parsed()) return cmd_recommend(rec_opts, alpha, max_replicas);
    if (cmp->parsed()) return cmd_compare(cmp_opts);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CatalogError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::system_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "pipeline failure: " << e.what() << '\n';
    return kPipelineFailure;
  }
  return kUsageError;
}
