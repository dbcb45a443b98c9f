#include <gtest/gtest.h>

#include <algorithm>

#include "adsieve/filter.hpp"
#include "adsieve/rng.hpp"
#include "criteria.hpp"
#include "support.hpp"

namespace adsieve {
namespace {

MatchContext Ctx(std::string host, bool third, ResourceKind kind = ResourceKind::kOther) {
  return {std::move(host), third, kind};
}

TEST(ParseRule, DomainAnchoredSeparator) {
  auto rule = ParseRule("||adnetwork.com^");
  ASSERT_TRUE(rule);
  const auto& n = std::get<NetworkRule>(*rule);
  EXPECT_TRUE(n.domain_anchor);
  EXPECT_EQ(n.pattern, "adnetwork.com^");
  EXPECT_FALSE(n.exception);
}

TEST(ParseRule, CommentsAndBlanks) {
  ParseReport report;
  FilterSet set = ParseRules("\n! comment\n[Adblock Plus 2.0]\n", "t", &report);
  EXPECT_TRUE(set.empty());
  EXPECT_EQ(report.comments, 2u);
}

TEST(ParseRule, ExceptionWithNegatedParty) {
  auto rule = ParseRule("@@||example.com/assets/*$~third-party");
  ASSERT_TRUE(rule);
  const auto& n = std::get<NetworkRule>(*rule);
  EXPECT_TRUE(n.exception);
  ASSERT_TRUE(n.third_party);
  EXPECT_FALSE(*n.third_party);
}

TEST(ParseRule, UnsupportedIsSkippedWithDiagnostic) {
  ParseReport report;
  FilterSet set = ParseRules("/ad[0-9]+/\n||x.com^$popup\nexample.com##div > .ad\n##.ok\n", "t", &report);
  EXPECT_EQ(report.skipped, 3u);
  EXPECT_EQ(report.diagnostics.size(), 3u);
  EXPECT_EQ(set.hiding_rules().size(), 1u);
}

TEST(ParseRule, RoundTrip) {
  for (const char* text : {"||a.com^$third-party,domain=b.com|~c.b.com,script,~image",
                           "@@|http://x.com/ads|", "/banner/*/img", "example.com,~a.example.com###top",
                           "##.class1", "##div"}) {
    auto rule = ParseRule(text);
    ASSERT_TRUE(rule) << text;
    std::string again = std::visit([](const auto& r) { return r.Serialize(); }, *rule);
    EXPECT_EQ(ParseRule(again), rule) << text;
  }
}

TEST(MatchNetwork, Examples) {
  FilterSet set = ParseRules("||adnetwork.com^");
  EXPECT_TRUE(MatchNetwork(ParseUrl("http://adnetwork.com/ads.gif"), Ctx("example.com", true), set).blocked);
  EXPECT_FALSE(MatchNetwork(ParseUrl("http://adnetwork.com/ads.gif"), Ctx("example.com", true), {}).blocked);
  FilterSet party = ParseRules("/ads.js$third-party");
  EXPECT_FALSE(MatchNetwork(ParseUrl("http://example.com/ads.js"), Ctx("example.com", false), party).blocked);
}

TEST(MatchNetwork, ConformanceTable) {
  auto result = testing::CheckFilterConformance();
  EXPECT_TRUE(result.passed) << result.detail;
}

TEST(MatchNetwork, DecidingRuleReported) {
  FilterSet set = ParseRules("||a.com^\n@@||a.com/ok/\n");
  auto blocked = MatchNetwork(ParseUrl("http://a.com/x"), Ctx("b.com", true), set);
  EXPECT_TRUE(blocked.blocked);
  EXPECT_EQ(blocked.matched_rule, 0u);
  auto allowed = MatchNetwork(ParseUrl("http://a.com/ok/x"), Ctx("b.com", true), set);
  EXPECT_FALSE(allowed.blocked);
  EXPECT_EQ(allowed.matched_rule, 1u);
}

// Adding exceptions never grows the blocked set; adding blocks never shrinks it.
TEST(MatchNetwork, Monotonicity) {
  const std::vector<std::string> pool = {"||a.com^", "/ads/", "banner", "||b.net^$third-party",
                                         "@@||a.com/ok/", "@@/ads/keep", "||c.org^$script",
                                         "@@banner.gif"};
  const std::vector<std::string> urls = {"http://a.com/x", "http://a.com/ok/1", "http://b.net/ads/keep",
                                         "http://c.org/banner.gif", "http://d.com/ads/x"};
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (const auto& r : pool)
      if (rng.Bernoulli(0.5)) text += r + "\n";
    const std::string& extra = pool[rng.Below(pool.size())];
    FilterSet before = ParseRules(text), after = ParseRules(text + extra + "\n");
    for (const auto& u : urls) {
      auto url = ParseUrl(u);
      auto ctx = Ctx("e.com", true, ResourceKind::kScript);
      bool b0 = MatchNetwork(url, ctx, before).blocked, b1 = MatchNetwork(url, ctx, after).blocked;
      if (extra.starts_with("@@")) {
        EXPECT_LE(b1, b0);
      } else {
        EXPECT_GE(b1, b0);
      }
    }
  }
}

TEST(LabelGraph, ToyPage) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  FilterSet set = ParseRules("||adnetwork.com^");
  auto labels = LabelGraph(g, set);
  EXPECT_EQ(labels.size(), g.HttpNodes().size());
  EXPECT_EQ(labels.at(*g.FindUrl("http://adnetwork.com/")), Label::kAd);
  EXPECT_EQ(labels.at(*g.FindUrl("http://adnetwork.com/ads.gif")), Label::kAd);
  EXPECT_EQ(labels.at(*g.FindUrl("http://thirdparty.com/script1.js")), Label::kNonAd);
  EXPECT_EQ(labels.at(*g.FindUrl("http://example.com/img.gif")), Label::kNonAd);
  for (const auto& [id, label] : LabelGraph(g, {})) EXPECT_EQ(label, Label::kNonAd);
  FilterSet with_exception = ParseRules("||adnetwork.com^\n@@||adnetwork.com^\n");
  EXPECT_EQ(LabelGraph(g, with_exception).at(*g.FindUrl("http://adnetwork.com/")), Label::kNonAd);
}

TEST(LabelGraph, RuleOrderIndependent) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  std::vector<std::string> rules = {"||adnetwork.com^", "/script2.js", "@@||adnetwork.com/ads.gif",
                                    "||thirdparty.com^$third-party"};
  std::sort(rules.begin(), rules.end());
  std::map<NodeId, Label> first;
  do {
    std::string text;
    for (const auto& r : rules) text += r + "\n";
    auto labels = LabelGraph(g, ParseRules(text));
    if (first.empty()) first = labels;
    EXPECT_EQ(labels, first);
  } while (std::next_permutation(rules.begin(), rules.end()));
}

TEST(MatchHiding, Examples) {
  FilterSet set = ParseRules("##.class1\nexample.com###id3\n");
  EXPECT_TRUE(MatchHiding({"div", "", {"class1"}}, "example.com", set));
  EXPECT_FALSE(MatchHiding({"div", "x", {}}, "example.com", {}));
  EXPECT_FALSE(MatchHiding({"div", "id3", {}}, "other.com", set));
  EXPECT_TRUE(MatchHiding({"div", "id3", {}}, "www.example.com", set));
}

TEST(LabelsJson, RoundTrip) {
  std::map<NodeId, Label> labels = {{0, Label::kAd}, {4, Label::kNonAd}};
  EXPECT_EQ(LabelsFromJson(LabelsToJson(labels, "h")), labels);
}

TEST(RuleHitHistogram, CountsDecidingRules) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  FilterSet set = ParseRules("||adnetwork.com^\n||never.example^\n");
  RuleHitHistogram hits(set.network_rules().size());
  LabelGraph(g, set, &hits);
  EXPECT_EQ(hits.hits(0), 2u);
  EXPECT_EQ(hits.hits(1), 0u);
  EXPECT_EQ(hits.rules_fired(), 1u);
}

}  // namespace
}  // namespace adsieve
