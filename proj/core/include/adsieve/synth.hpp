#ifndef ADSIEVE_SYNTH_HPP_
#define ADSIEVE_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "adsieve/filter.hpp"
#include "adsieve/pageload.hpp"

namespace adsieve {

struct IntRange {
  int lo = 0;
  int hi = 0;

  bool operator==(const IntRange&) const = default;
};

struct CorpusSpec {
  int n_pages = 100;
  std::uint64_t seed = 7;
  IntRange dom_depth{2, 4};
  IntRange benign_resources{8, 16};
  IntRange ad_chains{1, 3};
  double ad_keyword_probability = 0.5;
  double tracker_script_probability = 0.5;
  bool companion_filters = true;

  // Throws ConfigError on empty ranges or probabilities outside [0, 1].
  void Validate() const;
};

struct SynthPage {
  std::string id;  // "page-007"
  PageLoadLog log;
  // Generator intent per normalized URL.
  std::map<std::string, Label> intent;
};

struct Corpus {
  std::vector<SynthPage> pages;
  std::string filters;  // empty when companion_filters is off
};

// Page i draws from DeriveSeed(spec.seed, i) only.
SynthPage GeneratePage(const CorpusSpec& spec, int index);
Corpus GenerateCorpus(const CorpusSpec& spec, int workers = 1);

// The companion list: one blocking rule per ad/tracker domain, an
// exception, hiding rules for ad slots, and rules that never fire.
std::string CompanionFilterList();

// {"config_hash"?, "pages": {page_id: {url: "AD" | "NON-AD"}}}
std::string IntentLabelsToJson(const Corpus& corpus, std::string_view config_hash = {});
std::map<std::string, std::map<std::string, Label>> IntentLabelsFromJson(std::string_view text);

// pages/<id>.jsonl, filters.txt, intent_labels.json
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& dir,
                 std::string_view config_hash = {});

}  // namespace adsieve

#endif  // ADSIEVE_SYNTH_HPP_
