#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tierplan {

inline constexpr int kDefaultTotalWeeks = 104;

/// Weekly usage counts, week 1 (oldest) stored at index 0.
/// A count is files accessed divided by files in the dataset, so it is real.
struct UsageHistory {
  Eigen::VectorXd counts;

  int weeks() const noexcept { return static_cast<int>(counts.size()); }
  /// 1-based week accessor.
  double week(int w) const { return counts(w - 1); }

  friend bool operator==(const UsageHistory& a, const UsageHistory& b) {
    return a.counts.size() == b.counts.size() && a.counts == b.counts;
  }
};

struct DatasetMetadata {
  std::string dataset_id;
  std::string origin;
  std::string configuration;
  std::string file_type;
  std::string data_type;  // "real" or "mc"
  std::string event_type;
  int creation_week = 1;
  int first_usage_week = 0;  // 0 when the dataset was never used
  int last_usage_week = 0;
  double replica_size_gb = 1.0;
  int replicas_on_disk = 1;

  double total_disk_gb() const noexcept { return replica_size_gb * replicas_on_disk; }

  friend bool operator==(const DatasetMetadata&, const DatasetMetadata&) = default;
};

struct DatasetRecord {
  DatasetMetadata metadata;
  UsageHistory history;

  const std::string& id() const noexcept { return metadata.dataset_id; }

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// Observation window (classifier/forecast inputs) followed by the label window.
struct SplitConfig {
  int observation_weeks = 78;
  int label_weeks = 26;

  int total_weeks() const noexcept { return observation_weeks + label_weeks; }
  void validate() const;
};

/// Thrown for malformed catalogue content. `line` is 1-based (0 when unknown,
/// e.g. JSON entries, where `line` holds the entry index instead).
class CatalogError : public std::runtime_error {
 public:
  CatalogError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class CatalogFormat { Csv, Json };

CatalogFormat format_from_string(const std::string& name);
CatalogFormat format_from_path(const std::filesystem::path& path);

/// Checks every record invariant and id uniqueness; throws CatalogError.
void validate_records(const std::vector<DatasetRecord>& records, int total_weeks = kDefaultTotalWeeks);

std::vector<DatasetRecord> parse_catalog(std::istream& in, CatalogFormat format,
                                         int total_weeks = kDefaultTotalWeeks);
std::vector<DatasetRecord> parse_catalog(const std::filesystem::path& path, CatalogFormat format,
                                         int total_weeks = kDefaultTotalWeeks);

void write_catalog(const std::vector<DatasetRecord>& records, std::ostream& out, CatalogFormat format,
                   int total_weeks = kDefaultTotalWeeks);
void write_catalog(const std::vector<DatasetRecord>& records, const std::filesystem::path& path,
                   CatalogFormat format, int total_weeks = kDefaultTotalWeeks);

/// Fractions of generated "cold" (unused in the label window) and "hot"
/// datasets. Must sum to 1.
struct PopularMixConfig {
  double cold_fraction = 0.5;
  double hot_fraction = 0.5;

  void validate() const;
};

/// Seeded synthetic corpus standing in for a real file catalogue.
///
/// Cold datasets follow an exponentially decaying weekly activity that stops
/// for good at a cutoff inside the observation window. Hot datasets are either
/// steady (independent weekly activity with occasional bursts) or periodic
/// (reuse every 8 to 40 weeks, with at least two cycles observed), and are
/// guaranteed at least one use in each window. Metadata is drawn from small vocabularies whose
/// frequencies differ mildly between the two classes. The number of cold
/// datasets is exactly round(n * cold_fraction).
std::vector<DatasetRecord> generate_synthetic_corpus(int n, std::uint64_t seed,
                                                     const PopularMixConfig& mix = {},
                                                     const SplitConfig& split = {});

}  // namespace tierplan
