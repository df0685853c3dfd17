#include <cmath>
#include <cstring>
#include <set>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "modgraph/dataset.hpp"
#include "modgraph/error.hpp"
#include "test_util.hpp"

namespace modgraph {
namespace {

SynthSpec five_modality_spec(std::size_t instances) {
  SynthSpec s;
  s.instances = instances;
  for (int k = 0; k < 4; ++k) {
    SynthModality m;
    m.name = "m" + std::to_string(k);
    m.feature_dim = 10 + k;
    s.modalities.push_back(m);
  }
  SynthModality noise;
  noise.name = "noise";
  noise.kind = ModalityKind::kNoise;
  s.modalities.push_back(noise);
  return s;
}

double absent_fraction(const ModalityTable& t) {
  return 1.0 - static_cast<double>(t.present_count()) / static_cast<double>(t.instance_count());
}

TEST(Generate, ShapesMatchSpec) {
  const SynthSpec spec = five_modality_spec(2000);
  const Dataset ds = generate_synthetic(spec, 1);
  EXPECT_EQ(ds.size(), 2000u);
  EXPECT_EQ(ds.class_count, 3u);
  ASSERT_EQ(ds.modalities.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(ds.modalities[k].features.rows(), 2000u);
    EXPECT_EQ(ds.modalities[k].features.cols(), spec.modalities[k].feature_dim);
    EXPECT_EQ(ds.modalities[k].name, spec.modalities[k].name);
  }
  EXPECT_NO_THROW(ds.validate());
}

TEST(Generate, Deterministic) {
  const SynthSpec spec = five_modality_spec(300);
  EXPECT_EQ(generate_synthetic(spec, 5), generate_synthetic(spec, 5));
  EXPECT_NE(generate_synthetic(spec, 5), generate_synthetic(spec, 6));
}

TEST(Generate, ClassesBalanced) {
  const Dataset ds = generate_synthetic(five_modality_spec(2001), 2);
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t l : ds.labels) ++counts[l];
  EXPECT_EQ(counts, (std::vector<std::size_t>{667, 667, 667}));
}

TEST(Generate, MissingRateRealized) {
  SynthSpec spec = five_modality_spec(2000);
  spec.modalities[1].missing_rate = 0.2;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset ds = generate_synthetic(spec, seed);
    EXPECT_NEAR(absent_fraction(ds.modalities[1]), 0.2, 0.02) << "seed " << seed;
    EXPECT_EQ(absent_fraction(ds.modalities[0]), 0.0);
  }
}

TEST(Generate, EveryInstanceKeepsAModality) {
  SynthSpec spec = five_modality_spec(2000);
  for (auto& m : spec.modalities) m.missing_rate = 0.8;
  const Dataset ds = generate_synthetic(spec, 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    bool any = false;
    for (const auto& t : ds.modalities) any = any || t.present[i];
    EXPECT_TRUE(any) << i;
  }
}

TEST(Generate, InvalidSpecIsConfigError) {
  SynthSpec spec = five_modality_spec(100);
  spec.class_count = 1;
  EXPECT_THROW(generate_synthetic(spec, 1), ConfigError);
  spec = five_modality_spec(100);
  spec.modalities[0].missing_rate = 1.0;
  EXPECT_THROW(generate_synthetic(spec, 1), ConfigError);
  spec = five_modality_spec(100);
  spec.modalities.resize(1);
  spec.modalities.push_back(spec.modalities[0]);
  spec.modalities[1].name = "x";
  spec.modalities[1].kind = ModalityKind::kNoise;
  EXPECT_THROW(generate_synthetic(spec, 1), ConfigError);
}

// Least-squares one-vs-rest regression on raw features with a bias column.
double linear_probe_accuracy(const ModalityTable& t, const std::vector<std::size_t>& labels,
                             std::size_t classes, std::size_t train_rows) {
  const std::size_t n = t.instance_count(), d = t.feature_dim;
  Eigen::MatrixXd x(n, d + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) x(i, c) = t.features(i, c);
    x(i, d) = 1.0;
  }
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(train_rows, classes);
  for (std::size_t i = 0; i < train_rows; ++i) y(i, labels[i]) = 1.0;
  const Eigen::MatrixXd w = x.topRows(train_rows).colPivHouseholderQr().solve(y);
  const Eigen::MatrixXd scores = x.bottomRows(n - train_rows) * w;
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    scores.row(r).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == labels[train_rows + r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n - train_rows);
}

TEST(Generate, InformativeLowNoiseModalityIsLinearlySeparable) {
  SynthSpec spec = five_modality_spec(2000);
  spec.modalities[0].noise_scale = 0.1;
  const Dataset ds = generate_synthetic(spec, 4);
  EXPECT_GE(linear_probe_accuracy(ds.modalities[0], ds.labels, 3, 1500), 0.9);
  // The noise modality carries no class signal.
  EXPECT_LT(linear_probe_accuracy(ds.modalities[4], ds.labels, 3, 1500), 0.45);
}

TEST(Missingness, ZeroRateIsNoOp) {
  const Dataset ds = generate_synthetic(five_modality_spec(500), 1);
  const std::vector<double> rates(5, 0.0);
  EXPECT_EQ(apply_missingness(ds, rates, 9), ds);
}

TEST(Missingness, RateRealizedWithinTolerance) {
  const Dataset ds = generate_synthetic(five_modality_spec(2000), 1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<double> rates(5, 0.0);
    rates[0] = 0.4;
    const Dataset out = apply_missingness(ds, rates, seed);
    EXPECT_NEAR(absent_fraction(out.modalities[0]), 0.4, 0.03);
    for (std::size_t k = 1; k < 5; ++k) EXPECT_EQ(out.modalities[k], ds.modalities[k]);
  }
}

TEST(Missingness, OrphansKeepOneUniformlyChosenModality) {
  const Dataset ds = generate_synthetic(five_modality_spec(2000), 2);
  const std::vector<double> rates(5, 0.99);
  const Dataset out = apply_missingness(ds, rates, 3);
  std::vector<std::size_t> kept(5, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t present = 0;
    for (std::size_t k = 0; k < 5; ++k) {
      if (out.modalities[k].present[i]) {
        ++present;
        ++kept[k];
        EXPECT_TRUE(ds.modalities[k].present[i]);
      }
    }
    EXPECT_GE(present, 1u);
  }
  // Roughly 400 each; a deterministic choice would pile onto one modality.
  for (std::size_t k = 0; k < 5; ++k) EXPECT_GT(kept[k], 300u) << k;
  EXPECT_NO_THROW(out.validate());
}

TEST(Missingness, AbsentEntriesStayAbsent) {
  SynthSpec spec = five_modality_spec(1000);
  spec.modalities[2].missing_rate = 0.3;
  const Dataset ds = generate_synthetic(spec, 4);
  std::vector<double> rates(5, 0.0);
  rates[2] = 0.2;
  const Dataset out = apply_missingness(ds, rates, 5);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.modalities[2].present[i]) EXPECT_FALSE(out.modalities[2].present[i]);
  }
}

TEST(Missingness, RateOfOneIsConfigError) {
  const Dataset ds = generate_synthetic(five_modality_spec(100), 1);
  std::vector<double> rates(5, 0.0);
  rates[0] = 1.0;
  EXPECT_THROW(apply_missingness(ds, rates, 1), ConfigError);
}

TEST(Split, DisjointAndDeterministic) {
  const Dataset ds = generate_synthetic(five_modality_spec(2500), 1);
  const auto [train, test] = split_dataset(ds, 0.2, 7);
  EXPECT_EQ(train.size(), 2000u);
  EXPECT_EQ(test.size(), 500u);
  std::set<std::string> ids(train.instance_ids.begin(), train.instance_ids.end());
  for (const auto& id : test.instance_ids) EXPECT_FALSE(ids.contains(id));
  EXPECT_EQ(split_dataset(ds, 0.2, 7).second, test);
  EXPECT_THROW(split_dataset(ds, 1.0, 7), ConfigError);
}

TEST(Load, GoldenFixture) {
  const Dataset ds = load_dataset(testing::fixture("two_modality/dataset.manifest"));
  EXPECT_EQ(ds.instance_ids, (std::vector<std::string>{"p01", "p02", "p03", "p04", "p05"}));
  EXPECT_EQ(ds.labels, (std::vector<std::size_t>{0, 1, 0, 2, 1}));
  EXPECT_EQ(ds.class_count, 3u);
  ASSERT_EQ(ds.modalities.size(), 2u);
  const ModalityTable& clinical = ds.modalities[0];
  const ModalityTable& imaging = ds.modalities[1];
  EXPECT_EQ(clinical.name, "clinical");
  EXPECT_EQ(clinical.present, (std::vector<bool>{true, true, false, true, true}));
  EXPECT_EQ(imaging.present, (std::vector<bool>{false, true, true, true, false}));
  EXPECT_EQ(clinical.features, (Matrix{{71.5, 28, 0.125}, {64, -0.35, 1}, {0, 0, 0}, {80.25, 22, 0}, {59, 30, 2.5}}));
  // Rows are placed by id, not by file order.
  EXPECT_EQ(imaging.features, (Matrix{{0, 0}, {0.5, 1.5}, {1000, -2}, {7, 8}, {0, 0}}));
}

TEST(Load, MissingTableIsIoErrorNamingPath) {
  try {
    load_dataset(testing::fixture("two_modality/missing_file.manifest"));
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.csv"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_dataset(testing::fixture("two_modality/nope.manifest")), IoError);
}

TEST(Load, DisjointIdsAreConsistencyError) {
  try {
    load_dataset(testing::fixture("two_modality/disjoint_ids.manifest"));
    FAIL() << "expected ConsistencyError";
  } catch (const ConsistencyError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("q01"), std::string::npos) << msg;
    EXPECT_NE(msg.find("p01"), std::string::npos) << msg;
  }
}

TEST(Load, NonNumericCellIsParseErrorWithPosition) {
  try {
    load_dataset(testing::fixture("two_modality/bad_cell.manifest"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
  }
}

TEST(RoundTrip, GeneratedDatasetReloadsEqual) {
  SynthSpec spec = five_modality_spec(400);
  spec.modalities[0].missing_rate = 0.3;
  spec.modalities[3].missing_rate = 0.1;
  const Dataset ds = generate_synthetic(spec, 8);
  testing::TempDir dir;
  const auto manifest = write_dataset(ds, dir.path());
  const Dataset back = load_dataset(manifest);
  EXPECT_EQ(back, ds);
  for (std::size_t k = 0; k < ds.modalities.size(); ++k) {
    const auto& a = ds.modalities[k].features.data();
    const auto& b = back.modalities[k].features.data();
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)), 0);
  }
}

}  // namespace
}  // namespace modgraph
