#include "adsieve/obfuscation.hpp"

#include <sstream>

#include "adsieve/error.hpp"
#include "json.hpp"

namespace adsieve {
namespace {

constexpr std::string_view kAlphabet = "bcdfghjklmnpqrstvwz";
constexpr std::size_t kTokenLength = 8;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

ParsedUrl Reparse(const ParsedUrl& url) { return ParseUrl(url.Serialize()); }

}  // namespace

std::vector<std::string> DefaultThirdPartyPool() {
  std::vector<std::string> pool;
  for (int i = 1; i <= 20; ++i) {
    pool.push_back("rnd" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ".net");
  }
  return pool;
}

std::set<ObfuscationMode> ParseObfuscationModes(std::string_view spec) {
  std::set<ObfuscationMode> modes;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find_first_of(",+", start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string name = Trim(spec.substr(start, end - start));
    if (name == "html_attrs") {
      modes.insert(ObfuscationMode::kHtmlAttrs);
    } else if (name == "query_string") {
      modes.insert(ObfuscationMode::kQueryString);
    } else if (name == "domain") {
      modes.insert(ObfuscationMode::kDomain);
    } else if (name == "both_url") {
      modes.insert(ObfuscationMode::kQueryString);
      modes.insert(ObfuscationMode::kDomain);
    } else if (!name.empty()) {
      throw ConfigError("unknown obfuscation mode '" + name + "'");
    }
    start = end + 1;
  }
  if (modes.empty()) throw ConfigError("empty obfuscation mode set");
  return modes;
}

std::string ModesToString(const std::set<ObfuscationMode>& modes) {
  std::vector<std::string> parts;
  if (modes.count(ObfuscationMode::kHtmlAttrs)) parts.push_back("html_attrs");
  const bool q = modes.count(ObfuscationMode::kQueryString);
  const bool d = modes.count(ObfuscationMode::kDomain);
  if (q && d) {
    parts.push_back("both_url");
  } else if (q) {
    parts.push_back("query_string");
  } else if (d) {
    parts.push_back("domain");
  }
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "+") + p;
  return out;
}

PageObfuscator::PageObfuscator(std::uint64_t seed, const ObfuscationConfig& config)
    : rng_(seed), config_(config) {}

std::string PageObfuscator::Token(std::string_view original) {
  if (auto it = tokens_.find(original); it != tokens_.end()) return it->second;
  std::string token;
  do {
    token.clear();
    for (std::size_t i = 0; i < kTokenLength; ++i) {
      token += kAlphabet[rng_.Below(kAlphabet.size())];
    }
    // Collisions would merge distinct originals.
  } while (std::any_of(tokens_.begin(), tokens_.end(),
                       [&](const auto& kv) { return kv.second == token; }));
  tokens_.emplace(std::string(original), token);
  return token;
}

ElementRecord PageObfuscator::ObfuscateElement(const ElementRecord& element) {
  ElementRecord out = element;
  if (auto it = out.attributes.find("id"); it != out.attributes.end() && !it->second.empty()) {
    it->second = Token(it->second);
  }
  if (auto it = out.attributes.find("class"); it != out.attributes.end()) {
    std::istringstream in(it->second);
    std::string cls, joined;
    while (in >> cls) joined += (joined.empty() ? "" : " ") + Token(cls);
    it->second = joined;
  }
  return out;
}

QueryOps PageObfuscator::DrawQueryOps() {
  QueryOps ops;
  ops.rename = rng_.Bernoulli(0.5);
  ops.revalue = rng_.Bernoulli(0.5);
  ops.add = rng_.Bernoulli(0.5);
  ops.drop = rng_.Bernoulli(0.5);
  return ops;
}

ParsedUrl PageObfuscator::ApplyQueryOps(const ParsedUrl& url, const QueryOps& ops) {
  ParsedUrl out = url;
  std::vector<QueryParam> params;
  for (const QueryParam& p : url.query_params) {
    if (ops.drop && rng_.Bernoulli(config_.drop_probability)) continue;
    params.push_back(p);
  }
  for (QueryParam& p : params) {
    if (ops.rename && !p.name.empty()) p.name = Token(p.name);
    if (ops.revalue && p.has_value && !p.value.empty()) p.value = Token(p.value);
  }
  if (ops.add) {
    const auto n = rng_.Between(0, std::max(0, config_.max_added_params));
    for (std::int64_t i = 0; i < n; ++i) {
      QueryParam p;
      p.name = Token("+name" + std::to_string(rng_.Next()));
      p.value = Token("+value" + std::to_string(rng_.Next()));
      p.has_value = true;
      params.push_back(std::move(p));
    }
  }
  if (!params.empty()) params.front().separator = '&';
  out.query_params = std::move(params);
  // Matrix-style parameters move into a real query so the path is kept.
  if (!out.query_params.empty()) out.had_question_mark = true;
  return Reparse(out);
}

ParsedUrl PageObfuscator::ObfuscateQuery(const ParsedUrl& url) {
  return ApplyQueryOps(url, DrawQueryOps());
}

ParsedUrl PageObfuscator::ObfuscateDomain(const ParsedUrl& url,
                                          std::string_view page_registrable_domain) {
  if (url.registrable_domain.empty() || IsIpLiteral(url.host)) return url;
  auto it = hosts_.find(url.host);
  if (it == hosts_.end()) {
    std::string base = url.registrable_domain;
    if (base != page_registrable_domain) {
      const std::string key = "base:" + base;
      auto b = hosts_.find(key);
      if (b == hosts_.end()) {
        std::vector<std::string> pool;
        for (const auto& d : config_.third_party_pool) {
          if (d != page_registrable_domain) pool.push_back(d);
        }
        std::string pick = pool.empty() ? Token(key) + ".net" : pool[rng_.Below(pool.size())];
        b = hosts_.emplace(key, pick).first;
      }
      base = b->second;
    }
    std::string sub = url.subdomain_labels.empty() ? Token("sub:" + url.host)
                                                   : Token(url.subdomain_labels.front());
    for (std::size_t i = 1; i < url.subdomain_labels.size(); ++i) {
      sub += "." + url.subdomain_labels[i];
    }
    it = hosts_.emplace(url.host, sub + "." + base).first;
  }
  ParsedUrl out = url;
  out.host = it->second;
  return Reparse(out);
}

PageGraph ObfuscateHtmlAttrs(const PageGraph& graph, std::uint64_t seed) {
  ObfuscationConfig config;
  config.modes = {ObfuscationMode::kHtmlAttrs};
  return ObfuscateGraph(graph, config, seed);
}

ParsedUrl ObfuscateQueryString(const ParsedUrl& url, std::uint64_t seed) {
  ObfuscationConfig config;
  PageObfuscator ob(seed, config);
  return ob.ObfuscateQuery(url);
}

ParsedUrl ObfuscateDomain(const ParsedUrl& url, std::string_view page_registrable_domain,
                          std::uint64_t seed, const ObfuscationConfig& config) {
  PageObfuscator ob(seed, config);
  return ob.ObfuscateDomain(url, page_registrable_domain);
}

PageGraph ObfuscateGraph(const PageGraph& graph, const ObfuscationConfig& config,
                         std::uint64_t page_seed) {
  PageGraph out = graph;
  PageObfuscator ob(page_seed, config);
  const bool html = config.modes.count(ObfuscationMode::kHtmlAttrs) > 0;
  const bool query = config.modes.count(ObfuscationMode::kQueryString) > 0;
  const bool domain = config.modes.count(ObfuscationMode::kDomain) > 0;
  std::map<std::string, std::string> renamed;
  for (const Node& node : graph.nodes()) {
    if (const ElementRecord* e = node.element(); e && html) {
      out.SetPayload(node.id, ob.ObfuscateElement(*e));
    } else if (const ParsedUrl* u = node.url(); u && (query || domain)) {
      HttpRecord rec = std::get<HttpRecord>(node.payload);
      if (query) rec.url = ob.ObfuscateQuery(rec.url);
      if (domain) rec.url = ob.ObfuscateDomain(rec.url, graph.page().registrable_domain);
      renamed[u->Serialize()] = rec.url.Serialize();
      out.SetPayload(node.id, std::move(rec));
    }
  }
  if (!renamed.empty()) {
    for (const Node& node : graph.nodes()) {
      const ScriptRecord* s = node.script();
      if (!s || !s->source_url) continue;
      auto it = renamed.find(*s->source_url);
      if (it == renamed.end()) continue;
      ScriptRecord rec = *s;
      rec.source_url = it->second;
      out.SetPayload(node.id, std::move(rec));
    }
  }
  return out;
}

std::uint64_t PageSeed(std::uint64_t seed, std::string_view page_id) {
  return DeriveSeed(seed, StableHash(page_id));
}

ObfuscationCounts& ObfuscationCounts::operator+=(const ObfuscationCounts& o) {
  model_clean += o.model_clean;
  model_obf += o.model_obf;
  truth_ad += o.truth_ad;
  network_hits_clean += o.network_hits_clean;
  network_hits_obf += o.network_hits_obf;
  hiding_hits_clean += o.hiding_hits_clean;
  hiding_hits_obf += o.hiding_hits_obf;
  return *this;
}

double ObfuscationReport::network_recall_clean() const {
  return counts.truth_ad == 0 ? 0.0
                              : static_cast<double>(counts.network_hits_clean) / counts.truth_ad;
}

double ObfuscationReport::network_recall_obf() const {
  return counts.truth_ad == 0 ? 0.0
                              : static_cast<double>(counts.network_hits_obf) / counts.truth_ad;
}

std::string ObfuscationReport::ToJson(std::string_view config_hash) const {
  nlohmann::ordered_json j;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  j["mode"] = mode;
  j["model"] = {{"precision_clean", precision_clean()},
                {"precision_obf", precision_obf()},
                {"recall_clean", recall_clean()},
                {"recall_obf", recall_obf()}};
  j["filters"] = {{"network_recall_clean", network_recall_clean()},
                  {"network_recall_obf", network_recall_obf()},
                  {"hiding_hits_clean", counts.hiding_hits_clean},
                  {"hiding_hits_obf", counts.hiding_hits_obf}};
  auto counts_json = [](const Confusion& c) {
    return nlohmann::ordered_json{{"tp", c.tp}, {"fn", c.fn}, {"tn", c.tn}, {"fp", c.fp}};
  };
  j["counts"] = {{"model_clean", counts_json(counts.model_clean)},
                 {"model_obf", counts_json(counts.model_obf)},
                 {"truth_ad", counts.truth_ad},
                 {"network_hits_clean", counts.network_hits_clean},
                 {"network_hits_obf", counts.network_hits_obf}};
  return j.dump(2);
}

ObfuscationCounts EvaluateObfuscation(const std::vector<LabeledPage>& pages,
                                      const ForestModel& model, const FilterSet& filters,
                                      const ObfuscationConfig& config,
                                      const std::set<FeatureFamily>& families,
                                      const FeatureOptions& options, int workers) {
  std::vector<ObfuscationCounts> per_page(pages.size());
  ParallelFor(pages.size(), workers, [&](std::size_t i) {
    const LabeledPage& page = pages[i];
    const PageGraph obf = ObfuscateGraph(page.graph, config, PageSeed(config.seed, page.id));
    ObfuscationCounts& c = per_page[i];
    Dataset clean_rows = FeaturizeGraph(page.graph, page.labels, page.id, options);
    Dataset obf_rows = FeaturizeGraph(obf, page.labels, page.id, options);
    if (!families.empty()) {
      clean_rows = clean_rows.Select(families);
      obf_rows = obf_rows.Select(families);
    }
    for (const DatasetRow& row : clean_rows.rows) c.model_clean.Add(model.Predict(row.values).label, row.label);
    for (const DatasetRow& row : obf_rows.rows) c.model_obf.Add(model.Predict(row.values).label, row.label);

    const auto filter_clean = LabelGraph(page.graph, filters);
    const auto filter_obf = LabelGraph(obf, filters);
    for (const auto& [id, label] : page.labels) {
      if (label != Label::kAd) continue;
      ++c.truth_ad;
      if (auto it = filter_clean.find(id); it != filter_clean.end() && it->second == Label::kAd)
        ++c.network_hits_clean;
      if (auto it = filter_obf.find(id); it != filter_obf.end() && it->second == Label::kAd)
        ++c.network_hits_obf;
    }
    c.hiding_hits_clean = CountHidingHits(page.graph, filters);
    c.hiding_hits_obf = CountHidingHits(obf, filters);
  });
  ObfuscationCounts total;
  for (const auto& c : per_page) total += c;
  return total;
}

ObfuscationReport RunObfuscationExperiment(const std::vector<LabeledPage>& pages,
                                           const ForestModel& model, const FilterSet& filters,
                                           const ObfuscationConfig& config,
                                           const std::set<FeatureFamily>& families,
                                           const FeatureOptions& options, int workers) {
  ObfuscationReport report;
  report.mode = ModesToString(config.modes);
  report.counts = EvaluateObfuscation(pages, model, filters, config, families, options, workers);
  return report;
}

}  // namespace adsieve
