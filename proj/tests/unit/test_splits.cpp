// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "clifvqa/error.hpp"
#include "clifvqa/splits.hpp"

namespace clifvqa {
namespace {

using V = std::vector<double>;

TEST(Splits, EightyTwentyOnHundred) {
  const auto splits = make_splits(100, SplitConfig{});
  ASSERT_EQ(splits.size(), 10u);
  std::set<std::vector<std::size_t>> distinct;
  for (const auto& s : splits) {
    EXPECT_EQ(s.train.size(), 80u);
    EXPECT_EQ(s.test.size(), 20u);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    all.insert(s.test.begin(), s.test.end());
    EXPECT_EQ(all.size(), 100u);
    EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
    distinct.insert(s.test);
  }
  EXPECT_EQ(distinct.size(), 10u);
}

TEST(Splits, Deterministic) {
  const SplitConfig c{.splits = 4, .train_frac = 0.7, .seed = 8};
  const auto a = make_splits(33, c), b = make_splits(33, c);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].train, b[i].train);
    EXPECT_EQ(a[i].test, b[i].test);
  }
  auto other = c;
  other.seed = 9;
  EXPECT_NE(make_splits(33, other)[0].test, a[0].test);
}

TEST(Splits, DegenerateGuards) {
  try {
    make_splits(20, SplitConfig{.splits = 1, .train_frac = 1.0});
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("empty test split"), std::string::npos);
  }
  EXPECT_THROW(make_splits(9, SplitConfig{}), ValidationError);
  EXPECT_THROW((SplitConfig{.splits = 0}.validate()), ValidationError);
  EXPECT_THROW((SplitConfig{.train_frac = 0.0}.validate()), ValidationError);
}

TEST(Evaluate, ConstantPredictionsAreNaN) {
  const auto r = evaluate(V{1, 1, 1}, V{1, 2, 3}, 4);
  EXPECT_TRUE(std::isnan(r.srocc));
  EXPECT_TRUE(std::isnan(r.plcc));
  EXPECT_TRUE(std::isnan(r.krocc));
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.split_id, 4u);
  EXPECT_TRUE(report_json(r)["srocc"].is_null());
}

TEST(Evaluate, SummariesSkipNaN) {
  std::vector<EvalReport> reports{{0.5, 0.6, 0.4, 10, 0}, {std::nan(""), std::nan(""), std::nan(""), 10, 1},
                                  {0.9, 0.8, 0.7, 10, 2}, {0.8, 1.0, 0.6, 10, 3}};
  const auto mean = summarize_mean(reports);
  EXPECT_NEAR(mean.srocc, (0.5 + 0.9 + 0.8) / 3, 1e-12);
  const auto median = summarize_median(reports);
  EXPECT_DOUBLE_EQ(median.srocc, 0.8);
  EXPECT_DOUBLE_EQ(median.plcc, 0.8);
  const SplitSummary s{reports, mean, median};
  const auto csv = summary_csv(s);
  EXPECT_EQ(csv.rfind("split,n,srocc,plcc,krocc\n", 0), 0u);
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
  EXPECT_NE(csv.find("\nmedian,"), std::string::npos);
  const auto j = summary_json(s);
  EXPECT_EQ(j["splits"].size(), 4u);
  EXPECT_TRUE(j["splits"][1]["plcc"].is_null());
}

}  // namespace
}  // namespace clifvqa
