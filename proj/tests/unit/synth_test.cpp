#include <gtest/gtest.h>

#include <filesystem>

#include "adsieve/error.hpp"
#include "adsieve/filter.hpp"
#include "adsieve/graph.hpp"
#include "adsieve/synth.hpp"
#include "support.hpp"

namespace adsieve {
namespace {

TEST(Synth, DeterministicPerSeed) {
  CorpusSpec spec;
  spec.n_pages = 5;
  Corpus a = GenerateCorpus(spec), b = GenerateCorpus(spec, 4);
  ASSERT_EQ(a.pages.size(), 5u);
  for (std::size_t i = 0; i < a.pages.size(); ++i) {
    EXPECT_EQ(a.pages[i].log, b.pages[i].log);
    EXPECT_EQ(a.pages[i].intent, b.pages[i].intent);
  }
  EXPECT_EQ(a.pages[2].log, GeneratePage(spec, 2).log);
  EXPECT_EQ(a.pages[0].id, "page-000");
}

TEST(Synth, LogsValidateAndLabelsMatchIntent) {
  CorpusSpec spec;
  spec.n_pages = 30;
  Corpus corpus = GenerateCorpus(spec);
  FilterSet filters = ParseRules(corpus.filters);
  std::size_t urls = 0, ads = 0;
  for (const SynthPage& page : corpus.pages) {
    EXPECT_NO_THROW(ValidateLog(page.log));
    EXPECT_EQ(ParseLog(SerializeLog(page.log)), page.log);
    PageGraph g = BuildGraph(page.log);
    EXPECT_NO_THROW(CheckGraphConsistency(g));
    for (const auto& [id, label] : LabelGraph(g, filters)) {
      const std::string url = g.node(id).url()->Serialize();
      ASSERT_TRUE(page.intent.count(url)) << url;
      EXPECT_EQ(page.intent.at(url), label) << page.id << " " << url;
      ++urls;
      ads += label == Label::kAd;
    }
  }
  EXPECT_GT(ads, 0u);
  EXPECT_LT(ads, urls);
}

TEST(Synth, NoAdChainsNoMatches) {
  CorpusSpec spec;
  spec.n_pages = 10;
  spec.ad_chains = {0, 0};
  spec.tracker_script_probability = 0;
  Corpus corpus = GenerateCorpus(spec);
  FilterSet filters = ParseRules(corpus.filters);
  RuleHitHistogram hits(filters.network_rules().size());
  for (const SynthPage& page : corpus.pages) {
    for (const auto& [id, label] : LabelGraph(BuildGraph(page.log), filters, &hits))
      EXPECT_EQ(label, Label::kNonAd);
  }
  EXPECT_EQ(hits.rules_fired(), 0u);
}

TEST(Synth, SpecValidation) {
  CorpusSpec spec;
  spec.dom_depth = {3, 2};
  EXPECT_THROW(spec.Validate(), ConfigError);
  spec = {};
  spec.ad_keyword_probability = 1.5;
  EXPECT_THROW(spec.Validate(), ConfigError);
}

TEST(Synth, CorpusOnDisk) {
  CorpusSpec spec;
  spec.n_pages = 3;
  Corpus corpus = GenerateCorpus(spec);
  auto dir = testing::TempDir("corpus");
  WriteCorpus(corpus, dir, "cafe");
  EXPECT_TRUE(std::filesystem::exists(dir / "filters.txt"));
  EXPECT_EQ(ReadLogFile(dir / "pages" / "page-001.jsonl").page_url, corpus.pages[1].log.page_url);
  auto intent = IntentLabelsFromJson(testing::ReadText(dir / "intent_labels.json"));
  EXPECT_EQ(intent.at("page-002"), corpus.pages[2].intent);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace adsieve
