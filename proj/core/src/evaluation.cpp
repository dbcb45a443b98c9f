#include "adsieve/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "adsieve/error.hpp"
#include "adsieve/rng.hpp"
#include "json.hpp"

namespace adsieve {
namespace {

double Ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::ordered_json CountsJson(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["tp"] = r.counts.tp;
  j["fn"] = r.counts.fn;
  j["tn"] = r.counts.tn;
  j["fp"] = r.counts.fp;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc ? nlohmann::ordered_json(*r.auc) : nlohmann::ordered_json();
  return j;
}

nlohmann::ordered_json ReportJson(const EvalReport& r) {
  nlohmann::ordered_json j = CountsJson(r);
  auto& roc = j["roc"] = nlohmann::ordered_json::array();
  for (const RocPoint& p : r.roc) {
    roc.push_back({p.fpr, p.tpr,
                   p.threshold ? nlohmann::ordered_json(*p.threshold) : nlohmann::ordered_json()});
  }
  return j;
}

}  // namespace

void Confusion::Add(Label predicted, Label actual) {
  const bool p = predicted == Label::kAd;
  const bool a = actual == Label::kAd;
  if (p && a) ++tp;
  else if (p) ++fp;
  else if (a) ++fn;
  else ++tn;
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

double Confusion::precision() const { return Ratio(tp, tp + fp); }
double Confusion::recall() const { return Ratio(tp, tp + fn); }
double Confusion::accuracy() const { return Ratio(tp + tn, total()); }

EvalReport ReportFromCounts(const Confusion& counts) {
  EvalReport r;
  r.counts = counts;
  r.precision = counts.precision();
  r.recall = counts.recall();
  r.accuracy = counts.accuracy();
  return r;
}

EvalReport ConfusionMetrics(std::span<const Label> predicted, std::span<const Label> actual) {
  if (predicted.size() != actual.size()) {
    throw MetricError("predicted has " + std::to_string(predicted.size()) +
                      " labels, actual has " + std::to_string(actual.size()));
  }
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) c.Add(predicted[i], actual[i]);
  return ReportFromCounts(c);
}

RocCurve RocAuc(std::span<const double> scores, std::span<const Label> actual) {
  if (scores.size() != actual.size()) throw MetricError("score and label counts differ");
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw MetricError("score outside [0, 1] at index " + std::to_string(i));
    }
    pos += actual[i] == Label::kAd;
  }
  const std::uint64_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw MetricError("auc undefined: truth holds a single class");

  // Per distinct score, descending: positives and negatives at that score.
  std::map<double, std::pair<std::uint64_t, std::uint64_t>, std::greater<>> by_score;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& cell = by_score[scores[i]];
    (actual[i] == Label::kAd ? cell.first : cell.second)++;
  }

  RocCurve curve;
  std::uint64_t tp = 0, fp = 0;
  // Twice the area in units of 1/(pos*neg).
  std::uint64_t area2 = 0;
  for (const auto& [score, cell] : by_score) {
    curve.points.push_back({Ratio(fp, neg), Ratio(tp, pos), score});
    const std::uint64_t next_tp = tp + cell.first;
    const std::uint64_t next_fp = fp + cell.second;
    area2 += (next_fp - fp) * (tp + next_tp);
    tp = next_tp;
    fp = next_fp;
  }
  curve.points.push_back({1.0, 1.0, std::nullopt});
  curve.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

EvalReport Evaluate(std::span<const Label> predicted, std::span<const double> scores,
                    std::span<const Label> actual) {
  EvalReport r = ConfusionMetrics(predicted, actual);
  const bool mixed = r.counts.tp + r.counts.fn > 0 && r.counts.fp + r.counts.tn > 0;
  if (mixed) {
    RocCurve curve = RocAuc(scores, actual);
    r.roc = std::move(curve.points);
    r.auc = curve.auc;
  }
  return r;
}

std::vector<std::size_t> FoldAssignment::RowsIn(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < row_fold.size(); ++i) {
    if (row_fold[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldAssignment::RowsNotIn(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < row_fold.size(); ++i) {
    if (row_fold[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldAssignment StratifiedFolds(const Dataset& data, int k, std::uint64_t seed) {
  if (k < 2) throw FoldError("k must be at least 2, got " + std::to_string(k));
  FoldAssignment out;
  out.k = k;
  out.pages = data.Pages();
  if (static_cast<std::size_t>(k) > out.pages.size()) {
    throw FoldError("k=" + std::to_string(k) + " exceeds page count " +
                    std::to_string(out.pages.size()));
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < out.pages.size(); ++i) index[out.pages[i]] = i;
  std::vector<std::uint64_t> ad(out.pages.size()), total(out.pages.size());
  std::uint64_t ad_rows = 0;
  for (const DatasetRow& row : data.rows) {
    const std::size_t p = index[row.page];
    ++total[p];
    if (row.label == Label::kAd) {
      ++ad[p];
      ++ad_rows;
    }
  }
  if (ad_rows == 0 || ad_rows == data.rows.size()) {
    throw FoldError("data holds a single class");
  }

  std::vector<std::size_t> order(out.pages.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.Below(i)]);
  }
  // Exact fraction comparison: a/b < c/d.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ad[a] * total[b] < ad[b] * total[a];
  });
  out.page_fold.assign(out.pages.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.page_fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  out.row_fold.reserve(data.rows.size());
  for (const DatasetRow& row : data.rows) out.row_fold.push_back(out.page_fold[index[row.page]]);
  return out;
}

CvResult CrossValidate(const Dataset& data, int k, std::uint64_t seed,
                       const std::set<FeatureFamily>& families, const ForestConfig& forest) {
  const Dataset selected = families.empty() ? data : data.Select(families);
  CvResult cv;
  cv.folds = StratifiedFolds(selected, k, DeriveSeed(seed, StableHash("folds")));
  for (const FeatureSpec& f : selected.schema.features) cv.feature_names.push_back(f.name);
  const FeatureMatrix all = FeatureMatrix::FromDataset(selected);
  cv.scores.assign(selected.rows.size(), 0.0);
  cv.predictions.assign(selected.rows.size(), Label::kNonAd);
  std::vector<Label> actual;
  for (const DatasetRow& row : selected.rows) actual.push_back(row.label);

  for (int fold = 0; fold < k; ++fold) {
    const std::vector<std::size_t> train_rows = cv.folds.RowsNotIn(fold);
    const std::vector<std::size_t> test_rows = cv.folds.RowsIn(fold);
    const FeatureMatrix train = FeatureMatrix::FromDataset(selected, train_rows);
    const ForestModel model = ForestModel::Train(
        train, forest, DeriveSeed(seed, StableHash("forest"), static_cast<std::uint64_t>(fold)));
    cv.features_per_split = model.features_per_split();
    std::vector<Label> pred, truth;
    std::vector<double> scores;
    for (std::size_t r : test_rows) {
      const Prediction p = model.Predict(all.row(r));
      cv.scores[r] = p.vote_fraction;
      cv.predictions[r] = p.label;
      pred.push_back(p.label);
      scores.push_back(p.vote_fraction);
      truth.push_back(actual[r]);
    }
    cv.per_fold.push_back(Evaluate(pred, scores, truth));
    cv.models.push_back(model);
  }
  cv.pooled = Evaluate(cv.predictions, cv.scores, actual);
  return cv;
}

std::string ReportToJson(const EvalReport& report, std::string_view config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j.update(ReportJson(report));
  return j.dump(2);
}

std::string CvToJson(const CvResult& cv, std::string_view config_hash) {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["k"] = cv.folds.k;
  j["features_per_split"] = cv.features_per_split;
  j["feature_names"] = cv.feature_names;
  j["pooled"] = ReportJson(cv.pooled);
  auto& folds = j["folds"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < cv.per_fold.size(); ++f) {
    nlohmann::ordered_json fj;
    fj["fold"] = f;
    std::vector<std::string> pages;
    for (std::size_t p = 0; p < cv.folds.pages.size(); ++p) {
      if (cv.folds.page_fold[p] == static_cast<int>(f)) pages.push_back(cv.folds.pages[p]);
    }
    fj["pages"] = pages;
    fj.update(CountsJson(cv.per_fold[f]));
    folds.push_back(std::move(fj));
  }
  return j.dump(2);
}

std::string RocCsv(const std::vector<RocPoint>& roc, std::string_view config_hash) {
  std::string out;
  if (!config_hash.empty()) out += "# config_hash=" + std::string(config_hash) + "\n";
  out += "fpr,tpr,threshold\n";
  for (const RocPoint& p : roc) {
    out += FormatNumber(p.fpr) + "," + FormatNumber(p.tpr) + "," +
           (p.threshold ? FormatNumber(*p.threshold) : std::string("-inf")) + "\n";
  }
  return out;
}

}  // namespace adsieve
