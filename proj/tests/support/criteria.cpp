#include "criteria.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include "adsieve/evaluation.hpp"
#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/obfuscation.hpp"
#include "adsieve/pipeline.hpp"
#include "adsieve/synth.hpp"
#include "json.hpp"
#include "support.hpp"

namespace adsieve::testing {

namespace {

using Json = nlohmann::json;

std::string Fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

// Shared default run, produced once per process.
const std::filesystem::path& DefaultRun() {
  static std::once_flag once;
  static std::filesystem::path dir;
  std::call_once(once, [] {
    dir = TempDir("run");
    RunConfig config;
    config.out_dir = dir;
    config.workers = 1;
    Pipeline(config).Run();
  });
  return dir;
}

Json ReadJson(const std::filesystem::path& path) { return Json::parse(ReadText(path)); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t Column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
};

CsvTable ReadCsv(const std::filesystem::path& path) {
  CsvTable table;
  std::istringstream in(ReadText(path));
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) cells.push_back(cell);
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

std::vector<Label> Labels(std::initializer_list<int> bits) {
  std::vector<Label> out;
  for (int b : bits) out.push_back(b ? Label::kAd : Label::kNonAd);
  return out;
}

}  // namespace

CriterionResult CheckGoldenGraph() {
  const PageGraph g = LoadFixtureGraph("toy_page_core.jsonl");
  using K = NodeKind;
  const std::vector<NodeKind> kinds = {
      K::kSourceUrl,     K::kMiscElement,     K::kMiscElement,   K::kMiscElement,
      K::kScriptUrl,     K::kInlineSnippet,   K::kReferenceSnippet,
      K::kMiscElement,   K::kIframeUrl,       K::kIframeElement, K::kIframeElement,
      K::kImageElement,  K::kElementUrl};
  using E = EdgeKind;
  using EdgeKey = std::tuple<NodeId, NodeId, EdgeKind>;
  const std::multiset<EdgeKey> expected = {
      {0, 1, E::kHttpToHtmlLoad},          {1, 2, E::kHtmlParentChild},
      {1, 3, E::kHtmlParentChild},         {4, 6, E::kHttpScriptToJsRef},
      {3, 4, E::kHtmlToScriptOccurrence},  {3, 5, E::kHtmlToScriptOccurrence},
      {2, 7, E::kHtmlParentChild},         {7, 9, E::kHtmlParentChild},
      {7, 8, E::kHtmlToHttpIframeUrl},     {8, 9, E::kHttpToHtmlLoad},
      {2, 10, E::kHtmlParentChild},        {2, 8, E::kHtmlToHttpIframeUrl},
      {8, 10, E::kHttpToHtmlLoad},         {5, 10, E::kJsToHtmlInteraction},
      {2, 11, E::kHtmlParentChild},        {11, 12, E::kHtmlToHttpElementSrc},
  };
  if (g.size() != kinds.size())
    return {false, "node count " + std::to_string(g.size()) + ", want 13"};
  for (NodeId v = 0; v < g.size(); ++v) {
    if (g.node(v).kind != kinds[v])
      return {false, "node " + std::to_string(v + 1) + " is " + std::string(ToString(g.node(v).kind)) +
                         ", want " + std::string(ToString(kinds[v]))};
  }
  std::multiset<EdgeKey> actual;
  for (const Edge& e : g.edges()) {
    actual.insert({e.src, e.dst, e.kind});
    if (e.kind == EdgeKind::kJsToHtmlInteraction && e.action != InteractionAction::kInsertNode)
      return {false, "interaction edge lacks insert action"};
  }
  if (actual != expected)
    return {false, "edge set differs: " + std::to_string(actual.size()) + " edges built, " +
                       std::to_string(expected.size()) + " expected"};
  return {true, "13 nodes, 16 edges, all 7 edge kinds present"};
}

CriterionResult CheckCentralityOracle() {
  Rng rng(20240601);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Digraph g = RandomDigraph(rng, 50);
    const ConnectivityTable table = ComputeConnectivity(g);
    const auto katz = KatzBySolve(g, 0.05, 1.0);
    const auto dist = AllPairsDistances(g);
    for (std::uint32_t v = 0; v < g.node_count; ++v) {
      const double diffs[] = {
          std::abs(table.katz[v] - katz[v]),
          std::abs(table.closeness[v] - ClosenessFromDistances(dist[v])),
          std::abs(table.eccentricity[v] - EccentricityFromDistances(dist[v])),
          std::abs(table.mean_degree_connectivity[v] - MeanNeighbourDegree(g, v)),
      };
      for (double d : diffs) worst = std::max(worst, d);
    }
  }
  if (worst > 1e-9) return {false, "max deviation " + Fmt(worst)};
  std::ostringstream detail;
  detail << "200 graphs, max deviation " << worst;
  return {true, detail.str()};
}

CriterionResult CheckForestOracle() {
  Rng rng(99);
  std::size_t trees = 0, rows_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const FeatureMatrix data = RandomMatrix(rng, 30, 4);
    ForestConfig config;
    config.n_trees = static_cast<int>(rng.Between(3, 10));
    config.features_per_split = static_cast<int>(rng.Between(1, static_cast<std::int64_t>(data.cols)));
    config.tie_to_ad = rng.Bernoulli(0.5);
    const std::uint64_t seed = rng.Next();
    const ForestModel model = ForestModel::Train(data, config, seed);
    const std::string where = "dataset " + std::to_string(trial);
    if (model.trees().size() != static_cast<std::size_t>(config.n_trees))
      return {false, where + ": wrong tree count"};

    for (std::size_t t = 0; t < model.trees().size(); ++t) {
      TreeTrace trace;
      const DecisionTree replay =
          TrainTree(data, DeriveSeed(seed, t), static_cast<std::size_t>(config.features_per_split), &trace);
      // Bootstrap must be n uniform draws from the tree's own stream.
      Rng stream(DeriveSeed(seed, t));
      for (std::size_t i = 0; i < data.rows; ++i)
        if (trace.bootstrap.at(i) != stream.Below(data.rows))
          return {false, where + ": bootstrap draw mismatch"};
      for (const auto& subset : trace.subsets) {
        std::set<std::size_t> distinct(subset.begin(), subset.end());
        if (subset.size() != static_cast<std::size_t>(config.features_per_split) ||
            distinct.size() != subset.size() || *distinct.rbegin() >= data.cols)
          return {false, where + ": bad feature subset"};
      }
      std::size_t used = 0;
      const DecisionTree oracle = OracleTree(data, trace.bootstrap, trace.subsets, &used);
      if (used != trace.subsets.size())
        return {false, where + ": oracle consumed a different number of subsets"};
      if (!(oracle == model.trees()[t]) || !(replay == model.trees()[t]))
        return {false, where + ", tree " + std::to_string(t) + ": differs from oracle"};
      ++trees;
    }
    for (std::size_t r = 0; r < data.rows; ++r) {
      int votes = 0;
      for (const DecisionTree& tree : model.trees()) votes += OraclePredict(tree, data.row(r));
      const int n = config.n_trees;
      const bool ad = 2 * votes > n || (config.tie_to_ad && 2 * votes == n);
      const Prediction p = model.Predict(data.row(r));
      if ((p.label == Label::kAd) != ad ||
          p.vote_fraction != static_cast<double>(votes) / static_cast<double>(n))
        return {false, where + ", row " + std::to_string(r) + ": vote mismatch"};
      ++rows_checked;
    }
  }
  return {true, std::to_string(trees) + " trees and " + std::to_string(rows_checked) +
                    " predictions match the oracle"};
}

CriterionResult CheckMetricArithmetic() {
  // (tp, fp, fn, tn) = (3, 1, 2, 4)
  const auto predicted = Labels({1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
  const auto actual = Labels({1, 1, 1, 0, 1, 1, 0, 0, 0, 0});
  const EvalReport r = ConfusionMetrics(predicted, actual);
  if (r.counts != Confusion{3, 1, 2, 4}) return {false, "confusion counts"};
  if (r.precision != 3.0 / 4 || r.recall != 3.0 / 5 || r.accuracy != 7.0 / 10)
    return {false, "precision/recall/accuracy"};

  const EvalReport perfect = ConfusionMetrics(actual, actual);
  if (perfect.precision != 1 || perfect.recall != 1 || perfect.accuracy != 1)
    return {false, "perfect predictions"};
  const auto none = Labels({0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  const EvalReport silent = ConfusionMetrics(none, actual);
  if (silent.precision != 0 || silent.recall != 0 || silent.accuracy != 5.0 / 10)
    return {false, "degenerate denominators"};

  const std::vector<double> scores = {.9, .8, .7, .6, .5, .4};
  const auto truth = Labels({1, 1, 0, 1, 0, 0});
  const RocCurve roc = RocAuc(scores, truth);
  if (roc.auc != 8.0 / 9.0) return {false, "AUC " + Fmt(roc.auc) + ", want 8/9"};
  const std::vector<std::pair<double, double>> points = {
      {0, 0}, {0, 1.0 / 3}, {0, 2.0 / 3}, {1.0 / 3, 2.0 / 3}, {1.0 / 3, 1}, {2.0 / 3, 1}, {1, 1}};
  if (roc.points.size() != points.size()) return {false, "ROC point count"};
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (roc.points[i].fpr != points[i].first || roc.points[i].tpr != points[i].second)
      return {false, "ROC point " + std::to_string(i)};
  }
  if (roc.points.back().threshold.has_value()) return {false, "missing -inf sentinel"};

  const std::vector<double> flat(6, 0.5);
  if (RocAuc(flat, truth).auc != 0.5) return {false, "constant scores AUC"};
  const std::vector<double> ranked = {.9, .8, .7, .3, .2, .1};
  if (RocAuc(ranked, Labels({1, 1, 1, 0, 0, 0})).auc != 1.0) return {false, "ranked AUC"};

  Rng rng(5);
  const ForestModel ten = ForestModel::Train(RandomMatrix(rng, 20, 3), ForestConfig{}, 1);
  const Prediction half = ten.FromVotes(5), six = ten.FromVotes(6), all = ten.FromVotes(10);
  if (half.label != Label::kNonAd || half.vote_fraction != 0.5 || six.label != Label::kAd ||
      six.vote_fraction != 0.6 || all.label != Label::kAd || all.vote_fraction != 1.0)
    return {false, "vote tie-break"};
  return {true, "confusion, ROC points, AUC = 8/9, vote tie-break exact"};
}

CriterionResult CheckEndToEnd() {
  const auto& run = DefaultRun();
  const Json report = ReadJson(run / "eval_report.json");
  const double accuracy = report["pooled"]["accuracy"].get<double>();
  const double auc = report["pooled"]["auc"].get<double>();
  const CsvTable ablation = ReadCsv(run / "ablation.csv");
  double kw_precision = -1, kw_recall = -1;
  for (const auto& row : ablation.rows) {
    if (row[ablation.Column("families")] != "keyword") continue;
    kw_precision = std::stod(row[ablation.Column("precision")]);
    kw_recall = std::stod(row[ablation.Column("recall")]);
  }
  const std::string detail = "accuracy " + Fmt(accuracy) + ", AUC " + Fmt(auc) +
                             ", keyword-only precision " + Fmt(kw_precision) + " vs recall " +
                             Fmt(kw_recall);
  const bool ok = report["k"] == 10 && accuracy >= 0.95 && auc >= 0.97 && kw_precision >= 0 &&
                  kw_precision >= kw_recall;
  return {ok, detail};
}

CriterionResult CheckFilterConformance() {
  const auto table = LoadConformanceTable();
  if (table.size() < 40) return {false, "table has only " + std::to_string(table.size()) + " rows"};
  for (const ConformanceRow& row : table) {
    std::string text;
    for (const auto& rule : row.rules) {
      std::string why;
      auto parsed = ParseRule(rule, &why);
      if (!parsed) return {false, "line " + std::to_string(row.line) + ": rule rejected: " + why};
      const std::string again = std::visit([](const auto& r) { return r.Serialize(); }, *parsed);
      if (ParseRule(again) != parsed)
        return {false, "line " + std::to_string(row.line) + ": rule does not round-trip"};
      text += rule + "\n";
    }
    const FilterSet filters = ParseRules(text);
    const bool blocked = MatchNetwork(ParseUrl(row.url), row.context, filters).blocked;
    if (blocked != row.blocked)
      return {false, "line " + std::to_string(row.line) + ": " + row.url + " blocked=" +
                         (blocked ? "1" : "0")};
  }
  const Json hits = ReadJson(DefaultRun() / "rule_hits.json");
  const std::size_t fired = hits["rules_fired"], total = hits["rules_total"];
  if (fired == 0 || fired >= total)
    return {false, std::to_string(fired) + " of " + std::to_string(total) + " rules fired"};
  return {true, std::to_string(table.size()) + " rows agree; " + std::to_string(fired) + " of " +
                    std::to_string(total) + " rules ever fire"};
}

CriterionResult CheckObfuscationRobustness() {
  const CorpusSpec spec;
  const Corpus corpus = GenerateCorpus(spec);
  const FilterSet filters = ParseRules(corpus.filters, "companion");
  ObfuscationConfig attrs, domain;
  attrs.modes = {ObfuscationMode::kHtmlAttrs};
  domain.modes = {ObfuscationMode::kDomain};
  attrs.seed = domain.seed = DeriveSeed(spec.seed, StableHash("obfuscation"));

  std::size_t rows = 0, urls = 0, party_kept = 0, hiding_clean = 0, hiding_obf = 0;
  for (const SynthPage& page : corpus.pages) {
    const PageGraph g = BuildGraph(page.log);
    const PageGraph a = ObfuscateGraph(g, attrs, PageSeed(attrs.seed, page.id));
    const GraphFeaturizer fg(g), fa(a);
    for (NodeId v : g.HttpNodes()) {
      if (fg.Degree(v) != fa.Degree(v) || fg.Connectivity(v) != fa.Connectivity(v))
        return {false, page.id + ": html_attrs changed a structural feature of node " +
                           std::to_string(v)};
      ++rows;
    }
    hiding_clean += CountHidingHits(g, filters);
    hiding_obf += CountHidingHits(a, filters);

    const PageGraph d = ObfuscateGraph(g, domain, PageSeed(domain.seed, page.id));
    const std::string& site = g.page().registrable_domain;
    for (NodeId v : g.HttpNodes()) {
      ++urls;
      if (IsThirdParty(*g.node(v).url(), site) == IsThirdParty(*d.node(v).url(), site)) ++party_kept;
    }
  }
  const Json both = ReadJson(DefaultRun() / "obfuscation" / "both_url.json");
  const double recall = both["model"]["recall_obf"], network = both["filters"]["network_recall_obf"];
  const Json html = ReadJson(DefaultRun() / "obfuscation" / "html_attrs.json");
  const bool model_same = html["model"]["precision_clean"] == html["model"]["precision_obf"] &&
                          html["model"]["recall_clean"] == html["model"]["recall_obf"];

  std::ostringstream detail;
  detail << "(a) " << rows << " rows unchanged, hiding hits " << hiding_clean << " -> " << hiding_obf
         << (model_same ? ", model metrics unchanged" : ", model metrics moved")
         << "; (b) model recall " << Fmt(recall) << " vs filter recall " << Fmt(network)
         << "; (c) party kept " << party_kept << "/" << urls;
  const bool ok = hiding_clean > 0 && hiding_obf == 0 && model_same && recall > network &&
                  party_kept == urls;
  return {ok, detail.str()};
}

CriterionResult CheckDeterminism() {
  const auto& first = DefaultRun();
  const auto second = TempDir("rerun");
  RunConfig config;
  config.out_dir = second;
  config.workers = 1;
  Pipeline(config).Run();
  if (auto diff = DiffTrees(first, second)) return {false, "serial rerun: " + *diff};
  const auto third = TempDir("parallel");
  config.out_dir = third;
  config.workers = 4;
  Pipeline(config).Run();
  if (auto diff = DiffTrees(first, third)) return {false, "4-worker rerun: " + *diff};
  std::filesystem::remove_all(second);
  std::filesystem::remove_all(third);
  return {true, "serial rerun and 4-worker rerun byte-identical"};
}

const std::vector<Criterion>& AcceptanceCriteria() {
  static const std::vector<Criterion> criteria = {
      {"golden toy graph", 1, CheckGoldenGraph},
      {"centrality oracle", 10, CheckCentralityOracle},
      {"forest oracle", 30, CheckForestOracle},
      {"metric arithmetic", 1, CheckMetricArithmetic},
      {"end-to-end synthetic experiment", 120, CheckEndToEnd},
      {"filter conformance and bloat", 10, CheckFilterConformance},
      {"obfuscation robustness", 60, CheckObfuscationRobustness},
      {"determinism", 300, CheckDeterminism},
  };
  return criteria;
}

}  // namespace adsieve::testing
