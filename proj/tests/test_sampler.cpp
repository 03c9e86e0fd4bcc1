#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "case1.hpp"
#include "epec/dispatch.hpp"
#include "epec/error.hpp"
#include "epec/sampler.hpp"

using namespace epec;
using epec::testing::case1;

namespace {

const std::vector<Interval> kFullBox{{0, 900}, {0, 600}, {0, 300}};

Scenario case1_default_bounds() {
  return Scenario(case1().name(), case1().regions(), case1().technologies(), case1().gencos(), case1().loads(),
                  case1().voll());
}

std::string to_text(const Dataset& ds) {
  std::ostringstream os;
  write_dataset(ds, os);
  return os.str();
}

}  // namespace

TEST(SampleBuildouts, WithinBounds) {
  EXPECT_EQ(case1_default_bounds().sampling_bounds(), kFullBox);
  const auto b = sample_buildouts(5000, kFullBox, 1);
  ASSERT_EQ(b.size(), 5000u);
  for (const auto& row : b) {
    ASSERT_EQ(row.mw.size(), 3u);
    for (std::size_t s = 0; s < 3; ++s) {
      EXPECT_GE(row.mw[s], kFullBox[s].lo);
      EXPECT_LE(row.mw[s], kFullBox[s].hi);
    }
  }
  // Roughly uniform: each coordinate's mean near the interval midpoint.
  for (std::size_t s = 0; s < 3; ++s) {
    double mean = 0.0;
    for (const auto& row : b) mean += row.mw[s];
    mean /= b.size();
    EXPECT_NEAR(mean, 0.5 * kFullBox[s].hi, 0.03 * kFullBox[s].hi);
  }
}

TEST(SampleBuildouts, DegenerateInterval) {
  const auto b = sample_buildouts(1, {{5, 5}, {5, 5}, {5, 5}}, 9);
  EXPECT_EQ(b[0].mw, (std::vector<double>{5, 5, 5}));
}

TEST(SampleBuildouts, Deterministic) {
  EXPECT_EQ(sample_buildouts(100, kFullBox, 42), sample_buildouts(100, kFullBox, 42));
  EXPECT_NE(sample_buildouts(100, kFullBox, 42), sample_buildouts(100, kFullBox, 43));
  // Row i does not depend on how many rows are drawn.
  const auto short_run = sample_buildouts(10, kFullBox, 42);
  const auto long_run = sample_buildouts(100, kFullBox, 42);
  EXPECT_TRUE(std::equal(short_run.begin(), short_run.end(), long_run.begin()));
}

TEST(SampleBuildouts, RejectsBadInput) {
  EXPECT_THROW(sample_buildouts(0, kFullBox, 1), ValidationError);
  EXPECT_THROW(sample_buildouts(1, {{2, 1}}, 1), ValidationError);
  EXPECT_THROW(sample_buildouts(1, {{-1, 1}}, 1), ValidationError);
}

TEST(ProportionalBuildout, SplitsByUpperBounds) {
  const Buildout b = proportional_buildout(case1_default_bounds(), 1800);
  EXPECT_EQ(b.mw, (std::vector<double>{900, 600, 300}));
}

TEST(GenerateDataset, KnownRows) {
  const Dataset ds = generate_dataset(case1(), {Buildout{{300, 0, 0}}, Buildout{{0, 0, 0}}});
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"k_sys_ST", "k_sys_CT", "k_sys_CCGT"}));
  EXPECT_EQ(ds.target_names, (std::vector<std::string>{"profit_sys_ST", "profit_sys_CT", "profit_sys_CCGT"}));
  EXPECT_DOUBLE_EQ(ds.targets[0][0], 3'592'800.0);
  EXPECT_EQ(ds.targets[1], (std::vector<double>{0, 0, 0}));
}

TEST(GenerateDataset, WorkerCountDoesNotChangeBytes) {
  const auto b = sample_buildouts(300, case1().sampling_bounds(), 5);
  const std::string one = to_text(generate_dataset(case1(), b, 1));
  for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(to_text(generate_dataset(case1(), b, w)), one) << w << " workers";
}

TEST(GenerateDataset, TargetsMatchIndependentResimulation) {
  const auto b = sample_buildouts(200, kFullBox, 11);
  const Dataset ds = generate_dataset(case1(), b, 4);
  const auto& loads = case1().loads()[0].demand;
  const std::vector<double> costs{2, 3, 4};
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(ds.inputs[i], b[i].mw);
    // Hand-rolled merit order; techs are already in cost order.
    std::vector<double> profit(3, 0.0);
    for (double d : loads) {
      double left = d;
      std::vector<double> q(3);
      for (int g = 0; g < 3; ++g) {
        q[g] = std::min(b[i].mw[g], left);
        left -= q[g];
      }
      double price;
      if (left > 0.0) {
        price = 1000.0;
      } else {
        price = 1000.0;
        for (int g = 0; g < 3; ++g)
          if (q[g] < b[i].mw[g]) {
            price = costs[g];
            break;
          }
      }
      for (int g = 0; g < 3; ++g) profit[g] += (price - costs[g]) * q[g];
    }
    for (int g = 0; g < 3; ++g) EXPECT_NEAR(ds.targets[i][g], profit[g], 1e-6) << "row " << i;
  }
}

TEST(GenerateDataset, ErrorNamesRow) {
  try {
    generate_dataset(case1(), {Buildout{{1, 2, 3}}, Buildout{{1, 2}}});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(DatasetCsv, RoundTrip) {
  const Dataset ds = generate_dataset(case1(), sample_buildouts(50, kFullBox, 3));
  std::istringstream in(to_text(ds));
  EXPECT_EQ(read_dataset(in), ds);
}

TEST(DatasetCsv, MissingTargetColumnNamed) {
  std::istringstream in("k_sys_ST,k_sys_CT,profit_sys_ST\n1,2,3\n");
  try {
    read_dataset(in);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("profit_sys_CT"), std::string::npos) << e.what();
  }
}

TEST(DatasetCsv, EmptyFile) {
  std::istringstream in("");
  EXPECT_THROW(read_dataset(in), SchemaError);
}

TEST(DatasetCsv, RaggedAndNonNumericRows) {
  std::istringstream ragged("k_a,profit_a\n1\n");
  EXPECT_THROW(read_dataset(ragged), SchemaError);
  std::istringstream text("k_a,profit_a\n1,abc\n");
  EXPECT_THROW(read_dataset(text), ParseError);
}

TEST(TrainTestSplit, PartitionsRows) {
  const Split s = train_test_split(5000, 0.25, 1);
  EXPECT_EQ(s.test.size(), 1250u);
  EXPECT_EQ(s.train.size(), 3750u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 5000u);
  EXPECT_EQ(*all.rbegin(), 4999u);
  const Split again = train_test_split(5000, 0.25, 1);
  EXPECT_EQ(again.test, s.test);
  EXPECT_THROW(train_test_split(10, 1.0, 1), ValidationError);
}
