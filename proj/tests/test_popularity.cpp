#include "tierplan/popularity.hpp"
#include "tierplan/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace tierplan;

namespace {

struct Blobs {
  Eigen::MatrixXd X;
  Eigen::VectorXi y;
};

// Two Gaussian-ish clouds separated along the diagonal.
Blobs blobs(int n, std::uint64_t seed, double gap = 4.0) {
  Rng rng(seed);
  Blobs b{Eigen::MatrixXd(n, 2), Eigen::VectorXi(n)};
  for (int i = 0; i < n; ++i) {
    const int label = i % 2;
    const double centre = label ? gap : 0.0;
    b.y(i) = label;
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int j = 0; j < 12; ++j) s += rng.uniform();
      b.X(i, k) = centre + (s - 6.0);
    }
  }
  return b;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
std::vector<int> to_std(const Eigen::VectorXi& v) { return {v.data(), v.data() + v.size()}; }

std::vector<DatasetRecord> named(int n) {
  std::vector<DatasetRecord> r(n);
  for (int i = 0; i < n; ++i) r[i].metadata.dataset_id = "d" + std::to_string(i);
  return r;
}

}  // namespace

TEST(SplitHalves, TwoRecords) {
  const auto h = split_halves(named(2), 1);
  EXPECT_EQ(h.a.size(), 1u);
  EXPECT_EQ(h.b.size(), 1u);
}

TEST(SplitHalves, ReferenceSizeAndCoverage) {
  const auto records = named(7375);
  const auto h = split_halves(records, 42);
  EXPECT_EQ(h.a.size(), 3688u);
  EXPECT_EQ(h.b.size(), 3687u);
  std::vector<int> seen(7375, 0);
  for (int i : h.a) ++seen[i];
  for (int i : h.b) ++seen[i];
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(SplitHalves, DeterministicAndSeeded) {
  const auto records = named(101);
  const auto a = split_halves(records, 5);
  const auto b = split_halves(records, 5);
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.b, b.b);
  EXPECT_NE(split_halves(records, 6).a, a.a);
  EXPECT_THROW(split_halves(named(1), 5), std::invalid_argument);
}

TEST(Gbdt, SeparableBlobs) {
  const auto b = blobs(200, 1);
  const auto model = train_gbdt(b.X, b.y, GbdtConfig{});
  const Eigen::VectorXd p = model.predict_batch(b.X);
  EXPECT_GE(oracle::auc(to_std(p), to_std(b.y)), 0.99);
  EXPECT_NEAR(roc_auc(to_std(p), to_std(b.y)), oracle::auc(to_std(p), to_std(b.y)), 1e-12);

  double mean1 = 0.0, mean0 = 0.0;
  for (int i = 0; i < 200; ++i) (b.y(i) ? mean1 : mean0) += p(i) / 100.0;
  EXPECT_GT(mean1, mean0);
}

TEST(Gbdt, ConstantFeaturesGivePrior) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Constant(40, 3, 2.5);
  Eigen::VectorXi y = Eigen::VectorXi::Zero(40);
  y.head(10).setOnes();
  const auto model = train_gbdt(X, y, GbdtConfig{});
  Eigen::VectorXd probe(3);
  probe << -1e6, 0.0, 1e6;
  EXPECT_NEAR(model.predict_probability(probe), 0.25, 1e-6);
  EXPECT_NEAR(model.predict_probability(X.row(0).transpose()), 0.25, 1e-6);
}

TEST(Gbdt, Deterministic) {
  const auto b = blobs(300, 2, 1.5);
  const auto m1 = train_gbdt(b.X, b.y, GbdtConfig{});
  const auto m2 = train_gbdt(b.X, b.y, GbdtConfig{});
  EXPECT_EQ(m1.trees, m2.trees);
  EXPECT_EQ(m1.base_score, m2.base_score);
  EXPECT_EQ(m1.predict_batch(b.X), m2.predict_batch(b.X));
}

TEST(Gbdt, EmptyEnsembleIsHalf) {
  GbdtModel model;
  model.n_features = 2;
  EXPECT_EQ(model.predict_probability(Eigen::Vector2d(3.0, -7.0)), 0.5);
}

TEST(Gbdt, ExtremeInputsStayFinite) {
  const auto b = blobs(200, 3);
  const auto model = train_gbdt(b.X, b.y, GbdtConfig{});
  for (double v : {1e12, -1e12}) {
    const double p = model.predict_probability(Eigen::Vector2d(v, -v));
    EXPECT_TRUE(std::isfinite(p));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Gbdt, LossNeverIncreases) {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const auto b = blobs(250, seed, 1.0);
    const auto model = train_gbdt(b.X, b.y, GbdtConfig{60, 4, 0.3, 5, 0});
    ASSERT_EQ(model.training_loss.size(), 61u);
    for (std::size_t k = 1; k < model.training_loss.size(); ++k)
      EXPECT_LE(model.training_loss[k], model.training_loss[k - 1]) << "round " << k;
    EXPECT_NEAR(model.training_loss.back(), log_loss(model.predict_batch(b.X), b.y), 1e-9);
  }
}

TEST(Gbdt, TreeShapeRespectsConfig) {
  const auto b = blobs(400, 7, 1.0);
  const GbdtConfig config{30, 2, 0.1, 20, 0};
  const auto model = train_gbdt(b.X, b.y, config);
  EXPECT_EQ(model.trees.size(), 30u);
  for (const auto& tree : model.trees) {
    EXPECT_LE(tree.depth(), 2);
    // Count training rows reaching each leaf.
    std::vector<int> hits(tree.nodes.size(), 0);
    for (int i = 0; i < b.X.rows(); ++i) {
      int k = 0;
      while (tree.nodes[k].feature >= 0)
        k = b.X(i, tree.nodes[k].feature) <= tree.nodes[k].threshold ? tree.nodes[k].left : tree.nodes[k].right;
      ++hits[k];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
      if (tree.nodes[k].feature < 0) EXPECT_GE(hits[k], 20);
  }
}

TEST(Gbdt, Errors) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(20, 2);
  Eigen::VectorXi y = Eigen::VectorXi::Zero(20);
  try {
    train_gbdt(X, y, GbdtConfig{});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "degenerate training set");
  }
  y(3) = 1;
  const auto model = train_gbdt(X, y, GbdtConfig{5, 1, 0.1, 1, 0});
  EXPECT_THROW(model.predict_probability(Eigen::Vector3d::Zero()), std::invalid_argument);
  EXPECT_THROW(train_gbdt(X, y, GbdtConfig{0, 3, 0.1, 5, 0}), std::invalid_argument);
}

TEST(Gbdt, JsonRoundTrip) {
  const auto b = blobs(200, 8, 1.0);
  const auto model = train_gbdt(b.X, b.y, GbdtConfig{20, 3, 0.1, 5, 0}, {"f0", "f1"});
  std::stringstream buf;
  save_model(model, buf);
  const std::string text = buf.str();
  EXPECT_NE(text.find("\"feature_index\""), std::string::npos);
  EXPECT_NE(text.find("\"leaf_value\""), std::string::npos);
  EXPECT_NE(text.find("\"base_score\""), std::string::npos);
  const auto back = load_model(buf);
  std::stringstream again;
  save_model(back, again);
  EXPECT_EQ(again.str(), text);
  EXPECT_EQ(back.trees.size(), model.trees.size());
  EXPECT_EQ(back.feature_names, model.feature_names);
  EXPECT_EQ(back.predict_batch(b.X), model.predict_batch(b.X));

  std::istringstream broken(R"({"base_score": 0})");
  EXPECT_THROW(load_model(broken), std::invalid_argument);
}

TEST(Calibration, HandCountedEcdf) {
  const std::vector<double> ref = {0.8, 0.2, 0.6, 0.4};
  const auto map = fit_calibration(ref);
  EXPECT_TRUE(std::is_sorted(map.reference.begin(), map.reference.end()));
  EXPECT_EQ(popularity(map, 0.5), 0.5);
  EXPECT_EQ(popularity(map, 0.1), 0.0);
  EXPECT_EQ(popularity(map, 0.9), 1.0);
  EXPECT_EQ(popularity(map, 0.4), 0.375);
}

TEST(Calibration, SingletonAndEmpty) {
  const auto map = fit_calibration(std::vector<double>{0.3});
  EXPECT_EQ(popularity(map, 0.3), 0.5);
  EXPECT_THROW(fit_calibration(std::vector<double>{}), std::invalid_argument);
}

TEST(Calibration, ReferenceMapsToUniformGrid) {
  Rng rng(9);
  std::vector<double> ref(500);
  for (auto& r : ref) r = rng.uniform();
  const auto map = fit_calibration(ref);
  for (std::size_t i = 0; i < map.reference.size(); ++i)
    EXPECT_NEAR(popularity(map, map.reference[i]), (i + 0.5) / 500.0, 1e-15);
}

TEST(Calibration, Monotone) {
  Rng rng(10);
  std::vector<double> ref(200);
  for (auto& r : ref) r = std::round(rng.uniform() * 20.0) / 20.0;  // heavy ties
  const auto map = fit_calibration(ref);
  double prev = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double p = popularity(map, k / 1000.0);
    EXPECT_GE(p, prev);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(Calibration, HeldOutSampleIsUniform) {
  Rng rng(11);
  std::vector<double> ref(4000), held(1000);
  for (auto& r : ref) r = std::pow(rng.uniform(), 3.0);
  for (auto& h : held) h = std::pow(rng.uniform(), 3.0);
  const auto map = fit_calibration(ref);
  std::vector<double> pop;
  for (double h : held) pop.push_back(popularity(map, h));
  EXPECT_LT(oracle::ks_uniform(pop), 0.08);
}

TEST(Calibration, JsonRoundTrip) {
  const auto map = fit_calibration(std::vector<double>{0.9, 0.1, 0.5});
  std::stringstream buf;
  save_calibration(map, buf);
  EXPECT_EQ(load_calibration(buf), map);
}

TEST(CrossPredict, OutOfFoldAndDeterministic) {
  const auto records = generate_synthetic_corpus(600, 21);
  const auto features = extract_all(records, SplitConfig{});
  const GbdtConfig config{40, 3, 0.1, 5, 0};
  const auto cp = cross_predict(records, features, 77, config, 1);
  const auto again = cross_predict(records, features, 77, config, 2);
  EXPECT_EQ(cp.probability, again.probability);

  std::vector<int> y;
  for (const auto& f : features) y.push_back(label_value(f.label));
  EXPECT_GE(roc_auc(to_std(cp.probability), y), 0.9);

  // Flip labels inside half a: scores of half a come from the model trained on b and must not move.
  auto tampered = features;
  for (int i : cp.halves.a)
    tampered[i].label = tampered[i].label == Label::Popular ? Label::Unpopular : Label::Popular;
  const auto flipped = cross_predict(records, tampered, 77, config, 1);
  for (int i : cp.halves.a) EXPECT_EQ(flipped.probability(i), cp.probability(i));
}

TEST(CrossPredict, DegenerateHalf) {
  auto records = generate_synthetic_corpus(40, 3, PopularMixConfig{1.0, 0.0});
  EXPECT_THROW(cross_predict(records, SplitConfig{}, 1, GbdtConfig{}), std::invalid_argument);
}
