#include "tierplan/catalog.hpp"

#include "csv_util.hpp"
#include "tierplan/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <cerrno>
#include <system_error>
#include <unordered_set>

namespace tierplan {

namespace {

constexpr std::array<const char*, 11> kMetadataColumns = {
    "dataset_id",      "origin",         "configuration",    "file_type",
    "data_type",       "event_type",     "creation_week",    "first_usage_week",
    "last_usage_week", "replica_size_gb", "replicas_on_disk"};

std::string where(int line, const std::string& field) {
  std::string msg = "line " + std::to_string(line);
  if (!field.empty()) msg += ", field '" + field + "'";
  return msg + ": ";
}

[[noreturn]] void fail(int line, const std::string& field, const std::string& what) {
  throw CatalogError(where(line, field) + what, line, field);
}

void validate_record(const DatasetRecord& r, int total_weeks, int line) {
  const auto& m = r.metadata;
  if (m.dataset_id.empty()) fail(line, "dataset_id", "empty dataset id");
  if (m.data_type != "real" && m.data_type != "mc")
    fail(line, "data_type", "expected 'real' or 'mc', got '" + m.data_type + "'");
  if (!(m.replica_size_gb > 0.0) || !std::isfinite(m.replica_size_gb))
    fail(line, "replica_size_gb", "replica size must be a positive finite number");
  if (m.replicas_on_disk < 1) fail(line, "replicas_on_disk", "replica count must be >= 1");
  if (m.first_usage_week == 0) {
    if (m.last_usage_week != 0)
      fail(line, "last_usage_week", "last usage set without a first usage week");
  } else {
    if (m.creation_week > m.first_usage_week)
      fail(line, "first_usage_week", "first usage precedes creation week");
    if (m.first_usage_week > m.last_usage_week)
      fail(line, "last_usage_week", "last usage precedes first usage week");
  }
  if (r.history.weeks() != total_weeks)
    fail(line, "weeks",
         "expected " + std::to_string(total_weeks) + " weekly counts, got " +
             std::to_string(r.history.weeks()));
  for (int w = 0; w < r.history.weeks(); ++w) {
    const double c = r.history.counts(w);
    if (!std::isfinite(c) || c < 0.0)
      fail(line, "w" + std::to_string(w + 1), "weekly count must be finite and non-negative");
  }
}

void check_total_disk(const DatasetMetadata& m, double total, int line) {
  const double expected = m.total_disk_gb();
  if (!std::isfinite(total) || std::abs(total - expected) > 1e-6 * std::abs(expected))
    fail(line, "total_disk_gb",
         "total disk size " + csv::format_real(total) + " does not equal replica_size_gb * replicas_on_disk = " +
             csv::format_real(expected));
}

template <typename T>
T parse_field(const std::string& text, int line, const std::string& field) {
  T value{};
  if (!csv::parse_number(text, value)) fail(line, field, "cannot parse '" + text + "' as a number");
  return value;
}

// ---- CSV -------------------------------------------------------------------

std::vector<DatasetRecord> parse_csv(std::istream& in, int total_weeks) {
  std::string line_text;
  int line = 0;
  std::vector<std::string> header;
  while (std::getline(in, line_text)) {
    ++line;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    if (line_text.empty()) continue;
    header = csv::split_line(line_text);
    break;
  }
  if (header.empty()) throw CatalogError("missing CSV header row", line);

  auto find_column = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };

  std::array<int, kMetadataColumns.size()> meta_idx{};
  for (std::size_t k = 0; k < kMetadataColumns.size(); ++k) {
    meta_idx[k] = find_column(kMetadataColumns[k]);
    if (meta_idx[k] < 0) fail(line, kMetadataColumns[k], "required column missing from header");
  }
  const int total_idx = find_column("total_disk_gb");

  std::vector<int> week_idx;
  for (const auto& name : header)
    if (name.size() > 1 && name[0] == 'w' && std::all_of(name.begin() + 1, name.end(), [](unsigned char c) { return c >= '0' && c <= '9'; }))
      week_idx.push_back(0);
  if (static_cast<int>(week_idx.size()) != total_weeks)
    fail(line, "weeks",
         "expected " + std::to_string(total_weeks) + " weekly columns w1..w" + std::to_string(total_weeks) +
             ", got " + std::to_string(week_idx.size()));
  for (int w = 0; w < total_weeks; ++w) {
    week_idx[w] = find_column("w" + std::to_string(w + 1));
    if (week_idx[w] < 0) fail(line, "w" + std::to_string(w + 1), "weekly column missing from header");
  }

  std::vector<DatasetRecord> records;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line_text)) {
    ++line;
    if (!line_text.empty() && line_text.back() == '\r') line_text.pop_back();
    if (line_text.empty()) continue;
    const auto cells = csv::split_line(line_text);
    if (cells.size() != header.size()) {
      const bool week_count = cells.size() < header.size() && cells.size() + 1 > kMetadataColumns.size();
      fail(line, week_count ? "weeks" : "",
           "expected " + std::to_string(header.size()) + " fields (" + std::to_string(total_weeks) +
               " weekly counts), got " + std::to_string(cells.size()));
    }

    DatasetRecord r;
    auto& m = r.metadata;
    auto cell = [&](int k) -> const std::string& { return cells[meta_idx[k]]; };
    m.dataset_id = cell(0);
    m.origin = cell(1);
    m.configuration = cell(2);
    m.file_type = cell(3);
    m.data_type = cell(4);
    m.event_type = cell(5);
    m.creation_week = parse_field<int>(cell(6), line, kMetadataColumns[6]);
    m.first_usage_week = parse_field<int>(cell(7), line, kMetadataColumns[7]);
    m.last_usage_week = parse_field<int>(cell(8), line, kMetadataColumns[8]);
    m.replica_size_gb = parse_field<double>(cell(9), line, kMetadataColumns[9]);
    m.replicas_on_disk = parse_field<int>(cell(10), line, kMetadataColumns[10]);

    r.history.counts.resize(total_weeks);
    for (int w = 0; w < total_weeks; ++w)
      r.history.counts(w) = parse_field<double>(cells[week_idx[w]], line, "w" + std::to_string(w + 1));

    validate_record(r, total_weeks, line);
    if (total_idx >= 0)
      check_total_disk(m, parse_field<double>(cells[total_idx], line, "total_disk_gb"), line);
    if (!seen.insert(m.dataset_id).second) fail(line, "dataset_id", "duplicate dataset id '" + m.dataset_id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

void write_csv(const std::vector<DatasetRecord>& records, std::ostream& out, int total_weeks) {
  for (std::size_t k = 0; k < kMetadataColumns.size(); ++k) out << (k ? "," : "") << kMetadataColumns[k];
  for (int w = 1; w <= total_weeks; ++w) out << ",w" << w;
  out << '\n';
  for (const auto& r : records) {
    const auto& m = r.metadata;
    out << csv::quote(m.dataset_id) << ',' << csv::quote(m.origin) << ',' << csv::quote(m.configuration) << ','
        << csv::quote(m.file_type) << ',' << csv::quote(m.data_type) << ',' << csv::quote(m.event_type) << ','
        << m.creation_week << ',' << m.first_usage_week << ',' << m.last_usage_week << ','
        << csv::format_real(m.replica_size_gb) << ',' << m.replicas_on_disk;
    for (int w = 0; w < r.history.weeks(); ++w) out << ',' << csv::format_real(r.history.counts(w));
    out << '\n';
  }
}

// ---- JSON ------------------------------------------------------------------

std::vector<DatasetRecord> parse_json(std::istream& in, int total_weeks) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CatalogError(std::string("malformed JSON catalogue: ") + e.what());
  }
  if (!doc.is_array()) throw CatalogError("JSON catalogue must be an array of dataset objects");

  std::vector<DatasetRecord> records;
  std::unordered_set<std::string> seen;
  int entry = 0;
  for (const auto& obj : doc) {
    ++entry;
    DatasetRecord r;
    auto& m = r.metadata;
    std::string field;
    try {
      field = "dataset_id";
      m.dataset_id = obj.at(field).get<std::string>();
      field = "origin";
      m.origin = obj.at(field).get<std::string>();
      field = "configuration";
      m.configuration = obj.at(field).get<std::string>();
      field = "file_type";
      m.file_type = obj.at(field).get<std::string>();
      field = "data_type";
      m.data_type = obj.at(field).get<std::string>();
      field = "event_type";
      m.event_type = obj.at(field).get<std::string>();
      field = "creation_week";
      m.creation_week = obj.at(field).get<int>();
      field = "first_usage_week";
      m.first_usage_week = obj.at(field).get<int>();
      field = "last_usage_week";
      m.last_usage_week = obj.at(field).get<int>();
      field = "replica_size_gb";
      m.replica_size_gb = obj.at(field).get<double>();
      field = "replicas_on_disk";
      m.replicas_on_disk = obj.at(field).get<int>();
      field = "weeks";
      const auto weeks = obj.at(field).get<std::vector<double>>();
      r.history.counts = Eigen::Map<const Eigen::VectorXd>(weeks.data(), static_cast<Eigen::Index>(weeks.size()));
    } catch (const nlohmann::json::exception& e) {
      fail(entry, field, std::string("invalid or missing value (") + e.what() + ")");
    }
    validate_record(r, total_weeks, entry);
    if (obj.contains("total_disk_gb")) check_total_disk(m, obj["total_disk_gb"].get<double>(), entry);
    if (!seen.insert(m.dataset_id).second) fail(entry, "dataset_id", "duplicate dataset id '" + m.dataset_id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

void write_json(const std::vector<DatasetRecord>& records, std::ostream& out) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    const auto& m = r.metadata;
    nlohmann::ordered_json obj;
    obj["dataset_id"] = m.dataset_id;
    obj["origin"] = m.origin;
    obj["configuration"] = m.configuration;
    obj["file_type"] = m.file_type;
    obj["data_type"] = m.data_type;
    obj["event_type"] = m.event_type;
    obj["creation_week"] = m.creation_week;
    obj["first_usage_week"] = m.first_usage_week;
    obj["last_usage_week"] = m.last_usage_week;
    obj["replica_size_gb"] = m.replica_size_gb;
    obj["replicas_on_disk"] = m.replicas_on_disk;
    obj["weeks"] = std::vector<double>(r.history.counts.data(), r.history.counts.data() + r.history.counts.size());
    doc.push_back(std::move(obj));
  }
  out << doc.dump(1) << '\n';
}

}  // namespace

void SplitConfig::validate() const {
  if (observation_weeks < 1 || label_weeks < 1)
    throw std::invalid_argument("observation_weeks and label_weeks must both be >= 1");
}

void PopularMixConfig::validate() const {
  if (!(cold_fraction >= 0.0) || !(hot_fraction >= 0.0) || std::abs(cold_fraction + hot_fraction - 1.0) > 1e-9)
    throw std::invalid_argument("mix fractions must be non-negative and sum to 1");
}

CatalogFormat format_from_string(const std::string& name) {
  if (name == "csv") return CatalogFormat::Csv;
  if (name == "json") return CatalogFormat::Json;
  throw std::invalid_argument("unknown catalogue format '" + name + "' (expected csv or json)");
}

CatalogFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? CatalogFormat::Json : CatalogFormat::Csv;
}

void validate_records(const std::vector<DatasetRecord>& records, int total_weeks) {
  std::unordered_set<std::string> seen;
  int entry = 0;
  for (const auto& r : records) {
    validate_record(r, total_weeks, ++entry);
    if (!seen.insert(r.id()).second) fail(entry, "dataset_id", "duplicate dataset id '" + r.id() + "'");
  }
}

std::vector<DatasetRecord> parse_catalog(std::istream& in, CatalogFormat format, int total_weeks) {
  return format == CatalogFormat::Csv ? parse_csv(in, total_weeks) : parse_json(in, total_weeks);
}

std::vector<DatasetRecord> parse_catalog(const std::filesystem::path& path, CatalogFormat format, int total_weeks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open catalogue " + path.string());
  return parse_catalog(in, format, total_weeks);
}

void write_catalog(const std::vector<DatasetRecord>& records, std::ostream& out, CatalogFormat format,
                   int total_weeks) {
  validate_records(records, total_weeks);
  if (format == CatalogFormat::Csv)
    write_csv(records, out, total_weeks);
  else
    write_json(records, out);
}

void write_catalog(const std::vector<DatasetRecord>& records, const std::filesystem::path& path,
                   CatalogFormat format, int total_weeks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write catalogue " + path.string());
  write_catalog(records, out, format, total_weeks);
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "error writing catalogue " + path.string());
}

// ---- synthetic corpus --------------------------------------------------------

namespace {

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& vocab) {
  return vocab[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(N) - 1))];
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

double draw_count(Rng& rng, double level) { return std::max(0.001, round3(level * rng.uniform(0.5, 1.5))); }

constexpr std::array<const char*, 4> kOldConfigs = {"Collision11", "Collision12", "MC2011", "MC2012"};
constexpr std::array<const char*, 4> kNewConfigs = {"Collision15", "Collision16", "MC2015", "MC2016"};
constexpr std::array<const char*, 5> kOrigins = {"Reco", "Stripping", "Turbo", "Merge", "Sim"};
constexpr std::array<const char*, 5> kFileTypes = {"DST", "MDST", "LDST", "ALLSTREAMS.DST", "XDIGI"};
constexpr std::array<const char*, 6> kMcEvents = {"11102003", "12143001", "13104011",
                                                  "15512011", "27163003", "30000000"};

DatasetRecord make_record(int index, bool cold, std::uint64_t seed, const SplitConfig& split) {
  Rng rng(splitmix64(seed + static_cast<std::uint64_t>(index)));
  const int obs = split.observation_weeks;
  const int total = split.total_weeks();

  DatasetRecord r;
  auto& m = r.metadata;
  char id[32];
  std::snprintf(id, sizeof id, "ds%06d", index);
  m.dataset_id = id;

  const bool old_config = rng.bernoulli(cold ? 0.7 : 0.3);
  m.configuration = old_config ? pick(rng, kOldConfigs) : pick(rng, kNewConfigs);
  m.data_type = m.configuration.rfind("MC", 0) == 0 ? "mc" : "real";
  m.origin = pick(rng, kOrigins);
  m.file_type = pick(rng, kFileTypes);
  m.event_type = m.data_type == "mc" ? pick(rng, kMcEvents) : "90000000";
  m.replica_size_gb = std::max(0.001, round3(rng.log_uniform(1.0, 500.0)));
  m.replicas_on_disk = rng.uniform_int(1, 4);

  const int last_creation = std::max(1, std::min(cold ? obs / 2 : obs - obs / 10, obs));
  m.creation_week = rng.uniform_int(1, last_creation);
  const int start = m.creation_week;

  Eigen::VectorXd counts = Eigen::VectorXd::Zero(total);
  if (cold) {
    const double p0 = rng.log_uniform(0.15, 0.9);
    const double tau = rng.uniform(4.0, 25.0);
    const double level = rng.log_uniform(0.3, 60.0);
    const int cutoff = rng.uniform_int(std::min(start + 4, obs), obs);
    for (int t = start; t <= cutoff; ++t)
      if (rng.bernoulli(p0 * std::exp(-(t - start) / tau))) counts(t - 1) = draw_count(rng, level);
    if (counts.head(obs).maxCoeff() <= 0.0) counts(start - 1) = draw_count(rng, level);
  } else if (rng.bernoulli(0.6)) {
    // Steady: independent weekly activity plus occasional bursts.
    const double p_active = rng.log_uniform(0.2, 0.9);
    const double level = rng.log_uniform(0.3, 300.0);
    for (int t = start; t <= total; ++t) {
      if (!rng.bernoulli(p_active)) continue;
      double c = draw_count(rng, level);
      if (rng.bernoulli(0.05)) c = round3(c * rng.uniform(3.0, 8.0));
      counts(t - 1) = c;
    }
  } else {
    // Periodic reuse (e.g. reprocessing campaigns): long but regular gaps.
    const int period = rng.uniform_int(8, 40);
    const double level = rng.log_uniform(0.3, 100.0);
    m.creation_week = std::min(m.creation_week, std::max(1, obs - 2 * period - period / 2));
    for (int t = m.creation_week + rng.uniform_int(0, period / 2); t <= total; t += period) {
      const int week = std::clamp(t + rng.uniform_int(-1, 1), m.creation_week, total);
      if (rng.bernoulli(0.95)) counts(week - 1) = draw_count(rng, level);
    }
  }
  if (!cold) {
    const int first = m.creation_week;
    const double level = std::max(0.3, counts.maxCoeff());
    if (counts.segment(first - 1, obs - first + 1).maxCoeff() <= 0.0)
      counts(rng.uniform_int(first, obs) - 1) = draw_count(rng, level);
    if (counts.tail(split.label_weeks).maxCoeff() <= 0.0)
      counts(rng.uniform_int(obs + 1, total) - 1) = draw_count(rng, level);
  }
  r.history.counts = std::move(counts);

  for (int t = 1; t <= total; ++t) {
    if (r.history.week(t) > 0.0) {
      if (m.first_usage_week == 0) m.first_usage_week = t;
      m.last_usage_week = t;
    }
  }
  return r;
}

}  // namespace

std::vector<DatasetRecord> generate_synthetic_corpus(int n, std::uint64_t seed, const PopularMixConfig& mix,
                                                     const SplitConfig& split) {
  if (n < 1) throw std::invalid_argument("corpus size n must be >= 1");
  mix.validate();
  split.validate();

  const std::uint64_t corpus_seed = derive_seed(seed, "corpus");
  Rng rng(corpus_seed);
  const auto n_cold = static_cast<int>(std::llround(n * mix.cold_fraction));
  std::vector<char> cold(static_cast<std::size_t>(n), 0);
  std::fill(cold.begin(), cold.begin() + n_cold, 1);
  for (int i = n - 1; i > 0; --i) std::swap(cold[i], cold[rng.uniform_int(0, i)]);

  std::vector<DatasetRecord> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) records.push_back(make_record(i, cold[i] != 0, corpus_seed, split));
  return records;
}

}  // namespace tierplan
