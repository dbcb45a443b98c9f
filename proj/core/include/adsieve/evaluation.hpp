#ifndef ADSIEVE_EVALUATION_HPP_
#define ADSIEVE_EVALUATION_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/forest.hpp"

namespace adsieve {

// AD is the positive class.
struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  void Add(Label predicted, Label actual);
  Confusion& operator+=(const Confusion& o);
  std::uint64_t total() const { return tp + fp + fn + tn; }
  // Zero when the denominator is zero.
  double precision() const;
  double recall() const;
  double accuracy() const;

  bool operator==(const Confusion&) const = default;
};

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  // Positive iff score > threshold. nullopt is the -inf sentinel.
  std::optional<double> threshold;

  bool operator==(const RocPoint&) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // fpr and tpr non-decreasing
  double auc = 0;
};

struct EvalReport {
  Confusion counts;
  double precision = 0;
  double recall = 0;
  double accuracy = 0;
  std::vector<RocPoint> roc;
  std::optional<double> auc;  // absent when the truth holds one class
};

EvalReport ConfusionMetrics(std::span<const Label> predicted, std::span<const Label> actual);
EvalReport ReportFromCounts(const Confusion& counts);

// Throws MetricError on length mismatch, scores outside [0, 1], or
// single-class truth.
RocCurve RocAuc(std::span<const double> scores, std::span<const Label> actual);

// Full report: counts from `predicted`, ROC from `scores`. The ROC is
// skipped (auc absent) when the truth holds one class.
EvalReport Evaluate(std::span<const Label> predicted, std::span<const double> scores,
                    std::span<const Label> actual);

struct FoldAssignment {
  int k = 0;
  std::vector<std::string> pages;  // Dataset::Pages() order
  std::vector<int> page_fold;      // parallel to pages
  std::vector<int> row_fold;       // parallel to dataset rows

  std::vector<std::size_t> RowsIn(int fold) const;
  std::vector<std::size_t> RowsNotIn(int fold) const;
};

// Page-level stratification: pages are shuffled with `seed`, stably
// sorted by AD-row fraction and dealt round-robin. Throws FoldError when
// k < 2, k exceeds the page count, or the data holds one class.
FoldAssignment StratifiedFolds(const Dataset& data, int k, std::uint64_t seed);

struct CvResult {
  EvalReport pooled;
  std::vector<EvalReport> per_fold;
  FoldAssignment folds;
  std::vector<double> scores;       // parallel to dataset rows
  std::vector<Label> predictions;   // parallel to dataset rows
  std::vector<ForestModel> models;  // one per fold
  int features_per_split = 0;
  std::vector<std::string> feature_names;
};

// Trains on k-1 folds and predicts the held-out fold, k times. Pooled
// counts and ROC cover every row once. `families` selects columns; empty
// means all.
CvResult CrossValidate(const Dataset& data, int k, std::uint64_t seed,
                       const std::set<FeatureFamily>& families = {},
                       const ForestConfig& forest = {});

std::string ReportToJson(const EvalReport& report, std::string_view config_hash = {});
std::string CvToJson(const CvResult& cv, std::string_view config_hash = {});
// fpr,tpr,threshold
std::string RocCsv(const std::vector<RocPoint>& roc, std::string_view config_hash = {});

}  // namespace adsieve

#endif  // ADSIEVE_EVALUATION_HPP_
