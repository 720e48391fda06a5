#include "tierplan/catalog.hpp"
#include "tierplan/features.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tierplan;

namespace {

std::string header(int weeks = 104, bool with_total = false) {
  std::string h =
      "dataset_id,origin,configuration,file_type,data_type,event_type,creation_week,first_usage_week,"
      "last_usage_week,replica_size_gb,replicas_on_disk";
  if (with_total) h += ",total_disk_gb";
  for (int w = 1; w <= weeks; ++w) h += ",w" + std::to_string(w);
  return h + "\n";
}

std::string zero_row(const std::string& id, int weeks = 104, const std::string& total = {}) {
  std::string row = id + ",Reco,Collision12,DST,real,90000000,3,0,0,12.5,2";
  if (!total.empty()) row += "," + total;
  for (int w = 0; w < weeks; ++w) row += ",0";
  return row + "\n";
}

DatasetRecord hand_record(const std::string& id, int used_week, double count, double size, int replicas) {
  DatasetRecord r;
  r.metadata.dataset_id = id;
  r.metadata.origin = "Stripping";
  r.metadata.configuration = "MC2015";
  r.metadata.file_type = "ALLSTREAMS.DST";
  r.metadata.data_type = "mc";
  r.metadata.event_type = "11102003";
  r.metadata.creation_week = 1;
  r.metadata.first_usage_week = used_week;
  r.metadata.last_usage_week = used_week;
  r.metadata.replica_size_gb = size;
  r.metadata.replicas_on_disk = replicas;
  r.history.counts = Eigen::VectorXd::Zero(104);
  if (used_week > 0) r.history.counts(used_week - 1) = count;
  return r;
}

std::vector<DatasetRecord> roundtrip(const std::vector<DatasetRecord>& records, CatalogFormat format) {
  std::stringstream buf;
  write_catalog(records, buf, format);
  return parse_catalog(buf, format);
}

template <typename Fn>
CatalogError catch_catalog_error(Fn&& fn) {
  try {
    fn();
  } catch (const CatalogError& e) {
    return e;
  }
  ADD_FAILURE() << "expected CatalogError";
  return CatalogError("none");
}

}  // namespace

TEST(Catalog, SingleZeroRow) {
  std::istringstream in(header() + zero_row("ds1"));
  const auto records = parse_catalog(in, CatalogFormat::Csv);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].id(), "ds1");
  EXPECT_EQ(records[0].history.weeks(), 104);
  EXPECT_EQ(records[0].history.counts.sum(), 0.0);
  EXPECT_DOUBLE_EQ(records[0].metadata.total_disk_gb(), 25.0);
}

TEST(Catalog, TotalDiskMismatchNamesField) {
  std::istringstream in(header(104, true) + zero_row("ds1", 104, "26"));
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_EQ(e.field(), "total_disk_gb");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("total_disk_gb"), std::string::npos);
}

TEST(Catalog, TotalDiskWithinToleranceAccepted) {
  std::istringstream in(header(104, true) + zero_row("ds1", 104, "25.0000000001"));
  EXPECT_EQ(parse_catalog(in, CatalogFormat::Csv).size(), 1u);
}

TEST(Catalog, WrongWeekCountMentionsExpected) {
  std::istringstream in(header(103) + zero_row("ds1", 103));
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_NE(std::string(e.what()).find("104"), std::string::npos) << e.what();
}

TEST(Catalog, ShortRowMentionsExpected) {
  std::istringstream in(header() + zero_row("ds1", 100));
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("104"), std::string::npos) << e.what();
}

TEST(Catalog, MalformedNumberNamesLineAndField) {
  std::string row = zero_row("ds2");
  row.replace(row.find("12.5"), 4, "twelve");
  std::istringstream in(header() + zero_row("ds1") + row);
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_EQ(e.line(), 3);
  EXPECT_EQ(e.field(), "replica_size_gb");
}

TEST(Catalog, NegativeCountRejected) {
  std::string row = zero_row("ds1");
  row.replace(row.rfind(",0"), 2, ",-1");
  std::istringstream in(header() + row);
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_EQ(e.field(), "w104");
}

TEST(Catalog, DuplicateIdRejected) {
  std::istringstream in(header() + zero_row("ds1") + zero_row("ds1"));
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_NE(std::string(e.what()).find("ds1"), std::string::npos) << e.what();
}

TEST(Catalog, WeekOrderInvariant) {
  auto r = hand_record("ds1", 10, 1.0, 1.0, 1);
  r.metadata.creation_week = 11;
  EXPECT_THROW(validate_records({r}), CatalogError);
  r.metadata.creation_week = 1;
  r.metadata.last_usage_week = 9;
  EXPECT_THROW(validate_records({r}), CatalogError);
}

TEST(Catalog, ZeroReplicasRejected) {
  auto r = hand_record("ds1", 0, 0.0, 1.0, 1);
  r.metadata.replicas_on_disk = 0;
  EXPECT_THROW(validate_records({r}), CatalogError);
}

TEST(Catalog, MissingHeaderColumn) {
  std::string h = header();
  h.replace(h.find("origin,"), 7, "");
  std::string row = zero_row("ds1");
  row.replace(row.find("Reco,"), 5, "");
  std::istringstream in(h + row);
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Csv); });
  EXPECT_EQ(e.field(), "origin");
}

TEST(Catalog, ThreeRowsKeepFileOrder) {
  const std::vector<DatasetRecord> hand = {hand_record("zeta", 5, 0.25, 3.5, 1), hand_record("alpha", 0, 0.0, 1.0, 4),
                                           hand_record("mid", 90, 17.125, 250.0, 2)};
  const auto back = roundtrip(hand, CatalogFormat::Csv);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].id(), "zeta");
  EXPECT_EQ(back[1].id(), "alpha");
  EXPECT_EQ(back[2].id(), "mid");
  EXPECT_EQ(back, hand);
}

TEST(Catalog, EmptyCorpusWritesHeaderOnly) {
  std::stringstream buf;
  write_catalog({}, buf, CatalogFormat::Csv);
  EXPECT_EQ(buf.str(), header());
  EXPECT_TRUE(parse_catalog(buf, CatalogFormat::Csv).empty());

  std::stringstream json;
  write_catalog({}, json, CatalogFormat::Json);
  EXPECT_TRUE(parse_catalog(json, CatalogFormat::Json).empty());
}

TEST(Catalog, SyntheticRoundTripCsv) {
  const auto corpus = generate_synthetic_corpus(50, 3);
  const auto back = roundtrip(corpus, CatalogFormat::Csv);
  ASSERT_EQ(back.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) EXPECT_EQ(back[i], corpus[i]) << corpus[i].id();
}

TEST(Catalog, JsonCsvJsonRoundTrip) {
  const auto corpus = generate_synthetic_corpus(50, 11);
  std::stringstream json1;
  write_catalog(corpus, json1, CatalogFormat::Json);
  const auto from_json = parse_catalog(json1, CatalogFormat::Json);
  const auto via_csv = roundtrip(from_json, CatalogFormat::Csv);
  std::stringstream json2;
  write_catalog(via_csv, json2, CatalogFormat::Json);
  EXPECT_EQ(json1.str(), json2.str());
  EXPECT_EQ(via_csv, corpus);
}

TEST(Catalog, JsonErrorsNameEntryAndField) {
  std::istringstream in(R"([{"dataset_id":"a","origin":"o","configuration":"c","file_type":"f","data_type":"tape",
    "event_type":"e","creation_week":1,"first_usage_week":0,"last_usage_week":0,"replica_size_gb":1,
    "replicas_on_disk":1,"weeks":[]}])");
  const auto e = catch_catalog_error([&] { parse_catalog(in, CatalogFormat::Json); });
  EXPECT_FALSE(e.field().empty());
}

TEST(Catalog, FileRoundTripAndUnwritablePath) {
  const auto dir = std::filesystem::temp_directory_path() / "tierplan_catalog_test";
  std::filesystem::create_directories(dir);
  const auto corpus = generate_synthetic_corpus(20, 5);
  write_catalog(corpus, dir / "c.json", CatalogFormat::Json);
  EXPECT_EQ(parse_catalog(dir / "c.json", CatalogFormat::Json), corpus);
  EXPECT_ANY_THROW(write_catalog(corpus, dir / "no_such_dir" / "c.csv", CatalogFormat::Csv));
  EXPECT_ANY_THROW(parse_catalog(dir / "missing.csv", CatalogFormat::Csv));
  std::filesystem::remove_all(dir);
}

TEST(Catalog, FormatNames) {
  EXPECT_EQ(format_from_string("csv"), CatalogFormat::Csv);
  EXPECT_EQ(format_from_string("json"), CatalogFormat::Json);
  EXPECT_THROW(format_from_string("toml"), std::invalid_argument);
  EXPECT_EQ(format_from_path("x/y.json"), CatalogFormat::Json);
  EXPECT_EQ(format_from_path("x/y.csv"), CatalogFormat::Csv);
}

TEST(Generator, RejectsEmptyCorpus) {
  EXPECT_THROW(generate_synthetic_corpus(0, 1), std::invalid_argument);
}

TEST(Generator, RejectsBadMix) {
  EXPECT_THROW(generate_synthetic_corpus(10, 1, PopularMixConfig{0.7, 0.7}), std::invalid_argument);
  EXPECT_THROW(generate_synthetic_corpus(10, 1, PopularMixConfig{-0.1, 1.1}), std::invalid_argument);
}

TEST(Generator, Deterministic) {
  const auto a = generate_synthetic_corpus(100, 7);
  const auto b = generate_synthetic_corpus(100, 7);
  EXPECT_EQ(a, b);
  std::stringstream sa, sb;
  write_catalog(a, sa, CatalogFormat::Csv);
  write_catalog(b, sb, CatalogFormat::Csv);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(generate_synthetic_corpus(100, 8), a);
}

TEST(Generator, ColdShareNearHalf) {
  const auto corpus = generate_synthetic_corpus(1000, 1);
  int cold = 0;
  for (const auto& r : corpus) cold += r.history.counts.tail(26).sum() == 0.0;
  EXPECT_GE(cold, 400);
  EXPECT_LE(cold, 600);
}

TEST(Generator, ColdShareFollowsMix) {
  for (double f : {0.1, 0.3, 0.8}) {
    const auto corpus = generate_synthetic_corpus(600, 17, PopularMixConfig{f, 1.0 - f});
    int cold = 0;
    for (const auto& r : corpus) cold += compute_label(r.history, SplitConfig{}) == Label::Unpopular;
    EXPECT_NEAR(cold / 600.0, f, 0.05) << f;
  }
}

TEST(Generator, RecordsSatisfyInvariants) {
  const auto corpus = generate_synthetic_corpus(500, 23);
  EXPECT_NO_THROW(validate_records(corpus));
  for (const auto& r : corpus) {
    EXPECT_GE(r.metadata.replicas_on_disk, 1);
    EXPECT_LE(r.metadata.replicas_on_disk, 4);
    EXPECT_GT(r.metadata.replica_size_gb, 0.0);
    EXPECT_GE(r.metadata.first_usage_week, 1) << r.id();
    EXPECT_EQ(r.metadata.data_type == "mc", r.metadata.configuration.rfind("MC", 0) == 0);
  }
}
