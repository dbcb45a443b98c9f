#include <gtest/gtest.h>

#include <map>
#include <set>

#include "adsieve/error.hpp"
#include "adsieve/evaluation.hpp"
#include "criteria.hpp"

namespace adsieve {
namespace {

std::vector<Label> L(std::initializer_list<int> bits) {
  std::vector<Label> out;
  for (int b : bits) out.push_back(b ? Label::kAd : Label::kNonAd);
  return out;
}

// `pages` pages with `rows` rows each; page p holds ad rows when p % 3 == 0.
Dataset Synthetic(int pages, int rows) {
  Dataset d;
  d.schema.version = "t";
  d.schema.features = {{"a", FeatureFamily::kDegree, ""}, {"b", FeatureFamily::kKeyword, ""}};
  for (int p = 0; p < pages; ++p) {
    for (int r = 0; r < rows; ++r) {
      DatasetRow row;
      row.page = "p" + std::to_string(p);
      row.node_id = static_cast<NodeId>(r);
      const bool ad = p % 3 == 0 && r % 2 == 0;
      row.label = ad ? Label::kAd : Label::kNonAd;
      row.values = {ad ? 5.0 + r : 1.0 * r, static_cast<double>(p % 4)};
      d.rows.push_back(row);
    }
  }
  return d;
}

TEST(Metrics, HandFixtures) {
  auto result = testing::CheckMetricArithmetic();
  EXPECT_TRUE(result.passed) << result.detail;
}

TEST(Metrics, LengthMismatch) {
  EXPECT_THROW(ConfusionMetrics(L({1, 0}), L({1})), MetricError);
}

TEST(Roc, Errors) {
  std::vector<double> scores = {0.2, 0.4};
  EXPECT_THROW(RocAuc(scores, L({1, 1})), MetricError);
  std::vector<double> bad = {1.5, 0.1};
  EXPECT_THROW(RocAuc(bad, L({1, 0})), MetricError);
}

TEST(Roc, MonotoneAndConsistentWithHalfThreshold) {
  std::vector<double> scores = {0.1, 0.5, 0.5, 0.7, 0.9, 0.3, 0.6, 0.0};
  auto truth = L({0, 1, 0, 1, 1, 0, 1, 0});
  RocCurve roc = RocAuc(scores, truth);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
    EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
  }
  EXPECT_GE(roc.auc, 0.0);
  EXPECT_LE(roc.auc, 1.0);
  // score > 0.5 is the predict rule without tie-to-AD.
  std::vector<Label> predicted;
  for (double s : scores) predicted.push_back(s > 0.5 ? Label::kAd : Label::kNonAd);
  EvalReport r = ConfusionMetrics(predicted, truth);
  for (const RocPoint& p : roc.points) {
    if (p.threshold && *p.threshold == 0.5) {
      EXPECT_DOUBLE_EQ(p.tpr, r.recall);
      EXPECT_DOUBLE_EQ(p.fpr, 1.0 * r.counts.fp / (r.counts.fp + r.counts.tn));
    }
  }
}

TEST(Evaluate, SingleClassSkipsRoc) {
  std::vector<double> scores = {0.1, 0.2};
  EvalReport r = Evaluate(L({0, 0}), scores, L({0, 0}));
  EXPECT_FALSE(r.auc.has_value());
  EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Folds, TwentyPagesTenFolds) {
  Dataset d = Synthetic(20, 3);
  FoldAssignment f = StratifiedFolds(d, 10, 1);
  std::map<int, int> per_fold;
  for (int fold : f.page_fold) ++per_fold[fold];
  EXPECT_EQ(per_fold.size(), 10u);
  for (auto [fold, n] : per_fold) EXPECT_EQ(n, 2) << fold;
  std::set<std::size_t> seen;
  for (int k = 0; k < 10; ++k) {
    for (std::size_t r : f.RowsIn(k)) EXPECT_TRUE(seen.insert(r).second);
    EXPECT_EQ(f.RowsIn(k).size() + f.RowsNotIn(k).size(), d.rows.size());
  }
  EXPECT_EQ(seen.size(), d.rows.size());
}

TEST(Folds, DeterministicAndValidated) {
  Dataset d = Synthetic(12, 2);
  EXPECT_EQ(StratifiedFolds(d, 4, 3).page_fold, StratifiedFolds(d, 4, 3).page_fold);
  EXPECT_THROW(StratifiedFolds(d, 13, 3), FoldError);
  EXPECT_THROW(StratifiedFolds(d, 1, 3), FoldError);
  Dataset single = Synthetic(12, 2);
  for (auto& row : single.rows) row.label = Label::kNonAd;
  EXPECT_THROW(StratifiedFolds(single, 4, 3), FoldError);
}

TEST(CrossValidate, PooledCoversEveryRowOnce) {
  Dataset d = Synthetic(15, 4);
  CvResult cv = CrossValidate(d, 5, 11);
  EXPECT_EQ(cv.pooled.counts.total(), d.rows.size());
  EXPECT_EQ(cv.per_fold.size(), 5u);
  EXPECT_EQ(cv.models.size(), 5u);
  EXPECT_EQ(cv.scores.size(), d.rows.size());
  Confusion sum;
  for (const auto& r : cv.per_fold) sum += r.counts;
  EXPECT_EQ(sum, cv.pooled.counts);
  EXPECT_GE(cv.pooled.accuracy, 0.9);
}

TEST(CrossValidate, LeaveOnePageOut) {
  Dataset d = Synthetic(6, 4);
  EXPECT_NO_THROW(CrossValidate(d, 6, 2));
}

TEST(CrossValidate, FamilySelection) {
  Dataset d = Synthetic(9, 4);
  CvResult cv = CrossValidate(d, 3, 1, {FeatureFamily::kKeyword});
  EXPECT_EQ(cv.feature_names, std::vector<std::string>{"b"});
}

TEST(Output, RocCsvSentinel) {
  std::vector<RocPoint> roc = {{0, 0, 0.5}, {1, 1, std::nullopt}};
  std::string csv = RocCsv(roc);
  EXPECT_NE(csv.find("fpr,tpr,threshold"), std::string::npos);
  EXPECT_NE(csv.find("-inf"), std::string::npos);
}

}  // namespace
}  // namespace adsieve
