#ifndef ADSIEVE_PIPELINE_HPP_
#define ADSIEVE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/error.hpp"
#include "adsieve/features.hpp"
#include "adsieve/forest.hpp"
#include "adsieve/obfuscation.hpp"
#include "adsieve/synth.hpp"

namespace adsieve {

// Wraps the error of one stage; keeps its kind so exit codes survive.
class StageError : public Error {
 public:
  StageError(std::string stage, Kind kind, const std::string& what)
      : Error(kind, "stage=" + stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Key-value run configuration. One line per key, '#' starts a comment:
//
//   seed = 7
//   k = 10
//   families = degree,connectivity,domain,keyword
//   obfuscation.modes = html_attrs;query_string;domain;both_url
//
// Every stage seed derives from `seed`; the synthetic corpus uses it
// directly.
struct RunConfig {
  std::uint64_t seed = 7;
  int k = 10;
  int workers = 1;
  std::filesystem::path out_dir = "run";

  std::filesystem::path input_dir;  // logs (*.jsonl); empty = synthesize
  CorpusSpec corpus;
  std::vector<std::filesystem::path> filter_paths;  // empty = companion list
  std::filesystem::path psl_path;                   // empty = bundled
  std::string schema_version = DefaultSchema().version;
  ForestConfig forest;
  std::set<FeatureFamily> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
  std::vector<std::set<ObfuscationMode>> obfuscation_modes;
  std::vector<std::string> third_party_pool = DefaultThirdPartyPool();
  int max_added_params = 3;
  double drop_probability = 0.5;
  std::vector<std::string> cdf_features{"descendants", "katz_centrality", "closeness_centrality",
                                        "eccentricity", "mean_degree_connectivity", "in_degree",
                                        "out_degree"};

  RunConfig();

  // Unknown keys and malformed values throw ConfigError naming the line.
  static RunConfig FromText(std::string_view text);
  static RunConfig FromFile(const std::filesystem::path& path);
  // Applies one "key = value" assignment.
  void Set(std::string_view key, std::string_view value);

  // Canonical text of every key that affects results (workers and out
  // excluded), sorted by key.
  std::string ToText() const;
  // 16 hex digits of a stable hash of ToText().
  std::string Hash() const;
  void Validate() const;
};

// Stage outputs are files under config.out_dir, so each stage can run on
// its own once its inputs exist:
//
//   synth      corpus/pages/*.jsonl, corpus/filters.txt, corpus/intent_labels.json
//   build      graphs/<page>.json
//   label      labels/<page>.json, rule_hits.json, label_check.json
//   featurize  dataset.csv, schema.json, cdf/<feature>.<ad|non_ad>.csv
//   train      model.json
//   evaluate   eval_report.json, roc.csv, predictions.csv
//   ablate     ablation.csv
//   obfuscate  obfuscation/<mode>.json, obfuscation.csv
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  void Synth();
  void Build();
  void LabelUrls();
  void Featurize();
  void Train();
  void Evaluate();
  void Ablate();
  void Obfuscate();
  // All stages in order; synth only without input_dir.
  void Run();

  const RunConfig& config() const { return config_; }
  const std::string& config_hash() const { return hash_; }

 private:
  std::filesystem::path Path(const std::filesystem::path& rel) const;
  void Write(const std::filesystem::path& rel, const std::string& text) const;
  void WriteConfig() const;
  std::filesystem::path LogDir() const;
  FilterSet LoadFilters() const;
  std::vector<std::string> PageIds() const;
  Dataset LoadDataset() const;
  std::vector<LabeledPage> LoadPages() const;
  CvResult RunCv(const Dataset& data, const std::set<FeatureFamily>& families) const;

  RunConfig config_;
  std::string hash_;
  PublicSuffixList psl_;
};

}  // namespace adsieve

#endif  // ADSIEVE_PIPELINE_HPP_
