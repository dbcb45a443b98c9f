#include "adsieve/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "adsieve/evaluation.hpp"
#include "adsieve/graph.hpp"
#include "adsieve/rng.hpp"
#include "json.hpp"

namespace adsieve {
namespace {

namespace fs = std::filesystem;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    std::string item = Trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

IntRange ParseRange(std::string_view key, std::string_view value) {
  const auto dots = value.find("..");
  if (dots == std::string_view::npos) {
    const int v = ParseNumber<int>(key, value);
    return {v, v};
  }
  return {ParseNumber<int>(key, Trim(value.substr(0, dots))),
          ParseNumber<int>(key, Trim(value.substr(dots + 2)))};
}

std::string RangeText(const IntRange& r) {
  return std::to_string(r.lo) + ".." + std::to_string(r.hi);
}

std::string Join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string FamiliesText(const std::set<FeatureFamily>& families) {
  std::vector<std::string> names;
  for (FeatureFamily f : kAllFamilies) {
    if (families.count(f)) names.emplace_back(ToString(f));
  }
  return Join(names, ",");
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string HexHash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Sorted stems of files with `ext` in `dir`.
std::vector<std::string> Stems(const fs::path& dir, std::string_view ext) {
  if (!fs::is_directory(dir)) throw DataError("missing directory " + dir.string());
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename F>
void RunStage(const std::string& stage, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.kind(), e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageError(stage, Error::Kind::kData, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, Error::Kind::kInternal, e.what());
  }
}

}  // namespace

RunConfig::RunConfig() {
  obfuscation_modes = {{ObfuscationMode::kHtmlAttrs},
                       {ObfuscationMode::kQueryString},
                       {ObfuscationMode::kDomain},
                       {ObfuscationMode::kQueryString, ObfuscationMode::kDomain}};
}

void RunConfig::Set(std::string_view raw_key, std::string_view raw_value) {
  const std::string key = Trim(raw_key);
  const std::string value = Trim(raw_value);
  if (key == "seed") {
    seed = ParseNumber<std::uint64_t>(key, value);
    corpus.seed = seed;
  } else if (key == "k") {
    k = ParseNumber<int>(key, value);
  } else if (key == "workers") {
    workers = ParseNumber<int>(key, value);
  } else if (key == "out") {
    out_dir = value;
  } else if (key == "input_dir") {
    input_dir = value;
  } else if (key == "filters") {
    filter_paths.clear();
    for (auto& p : SplitList(value, ',')) filter_paths.emplace_back(p);
  } else if (key == "psl") {
    psl_path = value;
  } else if (key == "schema_version") {
    schema_version = value;
  } else if (key == "families") {
    families.clear();
    for (const auto& name : SplitList(value, ',')) {
      auto f = ParseFeatureFamily(name);
      if (!f) throw ConfigError("unknown feature family '" + name + "'");
      families.insert(*f);
    }
  } else if (key == "forest.n_trees") {
    forest.n_trees = ParseNumber<int>(key, value);
  } else if (key == "forest.features_per_split") {
    forest.features_per_split = ParseNumber<int>(key, value);
  } else if (key == "forest.tie_to_ad") {
    forest.tie_to_ad = ParseBool(key, value);
  } else if (key == "corpus.n_pages") {
    corpus.n_pages = ParseNumber<int>(key, value);
  } else if (key == "corpus.dom_depth") {
    corpus.dom_depth = ParseRange(key, value);
  } else if (key == "corpus.benign_resources") {
    corpus.benign_resources = ParseRange(key, value);
  } else if (key == "corpus.ad_chains") {
    corpus.ad_chains = ParseRange(key, value);
  } else if (key == "corpus.ad_keyword_probability") {
    corpus.ad_keyword_probability = ParseNumber<double>(key, value);
  } else if (key == "corpus.tracker_script_probability") {
    corpus.tracker_script_probability = ParseNumber<double>(key, value);
  } else if (key == "corpus.companion_filters") {
    corpus.companion_filters = ParseBool(key, value);
  } else if (key == "obfuscation.modes") {
    obfuscation_modes.clear();
    for (const auto& spec : SplitList(value, ';')) {
      obfuscation_modes.push_back(ParseObfuscationModes(spec));
    }
  } else if (key == "obfuscation.pool") {
    third_party_pool = SplitList(value, ',');
  } else if (key == "obfuscation.max_added_params") {
    max_added_params = ParseNumber<int>(key, value);
  } else if (key == "obfuscation.drop_probability") {
    drop_probability = ParseNumber<double>(key, value);
  } else if (key == "cdf.features") {
    cdf_features = SplitList(value, ',');
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

RunConfig RunConfig::FromText(std::string_view text) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    try {
      config.Set(std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  config.Validate();
  return config;
}

RunConfig RunConfig::FromFile(const fs::path& path) { return FromText(ReadText(path)); }

std::string RunConfig::ToText() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) { return FormatNumber(v); };
  kv["seed"] = std::to_string(seed);
  kv["k"] = std::to_string(k);
  kv["input_dir"] = input_dir.generic_string();
  std::vector<std::string> filters;
  for (const auto& p : filter_paths) filters.push_back(p.generic_string());
  kv["filters"] = Join(filters, ",");
  kv["psl"] = psl_path.generic_string();
  kv["schema_version"] = schema_version;
  kv["families"] = FamiliesText(families);
  kv["forest.n_trees"] = std::to_string(forest.n_trees);
  kv["forest.features_per_split"] = std::to_string(forest.features_per_split);
  kv["forest.tie_to_ad"] = forest.tie_to_ad ? "true" : "false";
  if (input_dir.empty()) {
    kv["corpus.n_pages"] = std::to_string(corpus.n_pages);
    kv["corpus.dom_depth"] = RangeText(corpus.dom_depth);
    kv["corpus.benign_resources"] = RangeText(corpus.benign_resources);
    kv["corpus.ad_chains"] = RangeText(corpus.ad_chains);
    kv["corpus.ad_keyword_probability"] = num(corpus.ad_keyword_probability);
    kv["corpus.tracker_script_probability"] = num(corpus.tracker_script_probability);
    kv["corpus.companion_filters"] = corpus.companion_filters ? "true" : "false";
  }
  std::vector<std::string> modes;
  for (const auto& m : obfuscation_modes) modes.push_back(ModesToString(m));
  kv["obfuscation.modes"] = Join(modes, ";");
  kv["obfuscation.pool"] = Join(third_party_pool, ",");
  kv["obfuscation.max_added_params"] = std::to_string(max_added_params);
  kv["obfuscation.drop_probability"] = num(drop_probability);
  kv["cdf.features"] = Join(cdf_features, ",");
  std::string out;
  for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  return out;
}

std::string RunConfig::Hash() const { return HexHash(StableHash(ToText())); }

void RunConfig::Validate() const {
  if (k < 2) throw ConfigError("k must be at least 2");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (forest.n_trees < 1) throw ConfigError("forest.n_trees must be at least 1");
  if (forest.features_per_split < 0) throw ConfigError("forest.features_per_split must be >= 0");
  if (families.empty()) throw ConfigError("families must not be empty");
  if (schema_version != DefaultSchema().version) {
    throw ConfigError("unsupported schema_version '" + schema_version + "'");
  }
  if (third_party_pool.empty()) throw ConfigError("obfuscation.pool must not be empty");
  if (max_added_params < 0) throw ConfigError("obfuscation.max_added_params must be >= 0");
  if (!(drop_probability >= 0 && drop_probability <= 1)) {
    throw ConfigError("obfuscation.drop_probability outside [0, 1]");
  }
  for (const auto& name : cdf_features) {
    if (!DefaultSchema().IndexOf(name)) throw ConfigError("unknown cdf feature '" + name + "'");
  }
  if (input_dir.empty()) corpus.Validate();
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
  config_.Validate();
  config_.forest.workers = config_.workers;
  hash_ = config_.Hash();
  psl_ = config_.psl_path.empty() ? PublicSuffixList::Bundled()
                                  : PublicSuffixList::FromFile(config_.psl_path);
}

fs::path Pipeline::Path(const fs::path& rel) const { return config_.out_dir / rel; }

void Pipeline::Write(const fs::path& rel, const std::string& text) const {
  const fs::path path = Path(rel);
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void Pipeline::WriteConfig() const {
  Write("config.txt", "# config_hash=" + hash_ + "\n" + config_.ToText());
}

fs::path Pipeline::LogDir() const {
  return config_.input_dir.empty() ? Path("corpus/pages") : config_.input_dir;
}

FilterSet Pipeline::LoadFilters() const {
  std::vector<fs::path> paths = config_.filter_paths;
  if (paths.empty()) {
    if (!config_.input_dir.empty()) throw ConfigError("filters must be set when input_dir is");
    paths.push_back(Path("corpus/filters.txt"));
  }
  FilterSet set;
  for (const auto& p : paths) set.Merge(ReadFilterFile(p));
  return set;
}

std::vector<std::string> Pipeline::PageIds() const { return Stems(Path("graphs"), ".json"); }

Dataset Pipeline::LoadDataset() const { return DatasetFromCsv(ReadText(Path("dataset.csv"))); }

std::vector<LabeledPage> Pipeline::LoadPages() const {
  const std::vector<std::string> ids = PageIds();
  std::vector<LabeledPage> pages(ids.size());
  ParallelFor(ids.size(), config_.workers, [&](std::size_t i) {
    pages[i].id = ids[i];
    pages[i].graph = GraphFromJson(ReadText(Path("graphs") / (ids[i] + ".json")), psl_);
    pages[i].labels = LabelsFromJson(ReadText(Path("labels") / (ids[i] + ".json")));
  });
  return pages;
}

CvResult Pipeline::RunCv(const Dataset& data, const std::set<FeatureFamily>& families) const {
  return CrossValidate(data, config_.k, DeriveSeed(config_.seed, StableHash("cv")), families,
                       config_.forest);
}

void Pipeline::Synth() {
  RunStage("synth", [&] {
    WriteConfig();
    const Corpus corpus = GenerateCorpus(config_.corpus, config_.workers);
    WriteCorpus(corpus, Path("corpus"), hash_);
  });
}

void Pipeline::Build() {
  RunStage("build", [&] {
    WriteConfig();
    const std::vector<std::string> ids = Stems(LogDir(), ".jsonl");
    if (ids.empty()) throw DataError("no *.jsonl logs in " + LogDir().string());
    ParallelFor(ids.size(), config_.workers, [&](std::size_t i) {
      const PageLoadLog log = ReadLogFile(LogDir() / (ids[i] + ".jsonl"));
      const PageGraph graph = BuildGraph(log, psl_);
      CheckGraphConsistency(graph);
      Write(fs::path("graphs") / (ids[i] + ".json"), GraphToJson(graph, hash_));
    });
  });
}

void Pipeline::LabelUrls() {
  RunStage("label", [&] {
    const FilterSet filters = LoadFilters();
    const std::vector<std::string> ids = PageIds();
    std::vector<RuleHitHistogram> hits(ids.size(), RuleHitHistogram(filters.network_rules().size()));
    std::vector<std::map<NodeId, Label>> labels(ids.size());
    std::vector<PageGraph> graphs(ids.size());
    ParallelFor(ids.size(), config_.workers, [&](std::size_t i) {
      graphs[i] = GraphFromJson(ReadText(Path("graphs") / (ids[i] + ".json")), psl_);
      labels[i] = LabelGraph(graphs[i], filters, &hits[i]);
      Write(fs::path("labels") / (ids[i] + ".json"), LabelsToJson(labels[i], hash_));
    });
    RuleHitHistogram total(filters.network_rules().size());
    for (const auto& h : hits) total.Merge(h);
    Write("rule_hits.json", HistogramToJson(total, filters, hash_));

    // Agreement with generator intent, when the corpus is synthetic.
    const fs::path intent_path = Path("corpus/intent_labels.json");
    if (config_.input_dir.empty() && fs::exists(intent_path)) {
      const auto intent = IntentLabelsFromJson(ReadText(intent_path));
      std::uint64_t agree = 0, total_urls = 0;
      nlohmann::ordered_json mismatches = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        auto page = intent.find(ids[i]);
        for (const auto& [id, label] : labels[i]) {
          const std::string url = graphs[i].node(id).url()->Serialize();
          ++total_urls;
          std::optional<Label> want;
          if (page != intent.end()) {
            if (auto it = page->second.find(url); it != page->second.end()) want = it->second;
          }
          if (want == label) {
            ++agree;
          } else if (mismatches.size() < 20) {
            mismatches.push_back({{"page", ids[i]},
                                  {"url", url},
                                  {"filter", ToString(label)},
                                  {"intent", want ? std::string(ToString(*want)) : "missing"}});
          }
        }
      }
      nlohmann::ordered_json j;
      j["config_hash"] = hash_;
      j["urls"] = total_urls;
      j["agree"] = agree;
      j["agreement"] = total_urls ? static_cast<double>(agree) / total_urls : 1.0;
      j["mismatches"] = std::move(mismatches);
      Write("label_check.json", j.dump(2) + "\n");
    }
  });
}

void Pipeline::Featurize() {
  RunStage("featurize", [&] {
    const std::vector<LabeledPage> pages = LoadPages();
    std::vector<Dataset> parts(pages.size());
    ParallelFor(pages.size(), config_.workers, [&](std::size_t i) {
      parts[i] = FeaturizeGraph(pages[i].graph, pages[i].labels, pages[i].id);
    });
    Dataset data;
    data.schema = DefaultSchema();
    for (const Dataset& part : parts) data.Append(part);
    Write("dataset.csv", DatasetToCsv(data, hash_));
    auto schema = nlohmann::ordered_json::parse(data.schema.ToJson());
    schema["config_hash"] = hash_;
    Write("schema.json", schema.dump(2) + "\n");
    for (const std::string& name : config_.cdf_features) {
      const std::size_t col = *data.schema.IndexOf(name);
      Write(fs::path("cdf") / (name + ".ad.csv"), CdfCsv(data, col, Label::kAd, hash_));
      Write(fs::path("cdf") / (name + ".non_ad.csv"), CdfCsv(data, col, Label::kNonAd, hash_));
    }
  });
}

void Pipeline::Train() {
  RunStage("ml", [&] {
    const Dataset data = LoadDataset().Select(config_.families);
    const ForestModel model =
        ForestModel::Train(data, config_.forest, DeriveSeed(config_.seed, StableHash("model")));
    Write("model.json", model.ToJson(hash_) + "\n");
  });
}

void Pipeline::Evaluate() {
  RunStage("ml", [&] {
    const Dataset data = LoadDataset();
    const CvResult cv = RunCv(data, config_.families);
    Write("eval_report.json", CvToJson(cv, hash_) + "\n");
    Write("roc.csv", RocCsv(cv.pooled.roc, hash_));
    std::string csv = "# config_hash=" + hash_ + "\npage,node_id,label,predicted,vote_fraction,fold\n";
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      const DatasetRow& row = data.rows[i];
      csv += row.page + "," + std::to_string(row.node_id) + "," + std::string(ToString(row.label)) +
             "," + std::string(ToString(cv.predictions[i])) + "," + FormatNumber(cv.scores[i]) +
             "," + std::to_string(cv.folds.row_fold[i]) + "\n";
    }
    Write("predictions.csv", csv);
  });
}

void Pipeline::Ablate() {
  RunStage("ml", [&] {
    const Dataset data = LoadDataset();
    std::string csv = "# config_hash=" + hash_ +
                      "\nfamilies,n_features,features_per_split,tp,fp,fn,tn,precision,recall,"
                      "accuracy,auc\n";
    for (unsigned mask = 1; mask < 16; ++mask) {
      std::set<FeatureFamily> families;
      for (unsigned b = 0; b < 4; ++b) {
        if (mask & (1u << b)) families.insert(kAllFamilies[b]);
      }
      const CvResult cv = RunCv(data, families);
      const EvalReport& r = cv.pooled;
      std::string name = FamiliesText(families);
      std::replace(name.begin(), name.end(), ',', '+');
      csv += name + "," + std::to_string(cv.feature_names.size()) + "," +
             std::to_string(cv.features_per_split) + "," + std::to_string(r.counts.tp) + "," +
             std::to_string(r.counts.fp) + "," + std::to_string(r.counts.fn) + "," +
             std::to_string(r.counts.tn) + "," + FormatNumber(r.precision) + "," +
             FormatNumber(r.recall) + "," + FormatNumber(r.accuracy) + "," +
             (r.auc ? FormatNumber(*r.auc) : std::string()) + "\n";
    }
    Write("ablation.csv", csv);
  });
}

void Pipeline::Obfuscate() {
  RunStage("obfuscate", [&] {
    const FilterSet filters = LoadFilters();
    const std::vector<LabeledPage> pages = LoadPages();
    const Dataset data = LoadDataset();
    const CvResult cv = RunCv(data, config_.families);
    std::map<std::string, int> fold_of;
    for (std::size_t p = 0; p < cv.folds.pages.size(); ++p) {
      fold_of[cv.folds.pages[p]] = cv.folds.page_fold[p];
    }
    std::vector<std::vector<LabeledPage>> by_fold(static_cast<std::size_t>(config_.k));
    for (const LabeledPage& page : pages) {
      // Pages without labeled URLs have no rows and no fold.
      auto it = fold_of.find(page.id);
      if (it != fold_of.end()) by_fold[it->second].push_back(page);
    }
    std::string csv = "# config_hash=" + hash_ +
                      "\nmode,precision_clean,precision_obf,recall_clean,recall_obf,"
                      "network_recall_clean,network_recall_obf,hiding_hits_clean,hiding_hits_obf\n";
    for (const auto& modes : config_.obfuscation_modes) {
      ObfuscationConfig oc;
      oc.modes = modes;
      oc.seed = DeriveSeed(config_.seed, StableHash("obfuscation"));
      oc.third_party_pool = config_.third_party_pool;
      oc.max_added_params = config_.max_added_params;
      oc.drop_probability = config_.drop_probability;
      ObfuscationReport report;
      report.mode = ModesToString(modes);
      for (int f = 0; f < config_.k; ++f) {
        report.counts += EvaluateObfuscation(by_fold[f], cv.models[f], filters, oc,
                                             config_.families, {}, config_.workers);
      }
      Write(fs::path("obfuscation") / (report.mode + ".json"), report.ToJson(hash_) + "\n");
      csv += report.mode + "," + FormatNumber(report.precision_clean()) + "," +
             FormatNumber(report.precision_obf()) + "," + FormatNumber(report.recall_clean()) +
             "," + FormatNumber(report.recall_obf()) + "," +
             FormatNumber(report.network_recall_clean()) + "," +
             FormatNumber(report.network_recall_obf()) + "," +
             std::to_string(report.counts.hiding_hits_clean) + "," +
             std::to_string(report.counts.hiding_hits_obf) + "\n";
    }
    Write("obfuscation.csv", csv);
  });
}

void Pipeline::Run() {
  if (config_.input_dir.empty()) Synth();
  Build();
  LabelUrls();
  Featurize();
  Train();
  Evaluate();
  Ablate();
  Obfuscate();
}

}  // namespace adsieve
