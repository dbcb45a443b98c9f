#include <gtest/gtest.h>

#include <sstream>

#include "adsieve/features.hpp"
#include "adsieve/filter.hpp"
#include "support.hpp"

namespace adsieve {
namespace {

using testing::FixturePath;
using testing::ReadText;

TEST(Schema, FamilySizes) {
  const auto& s = DefaultSchema();
  EXPECT_EQ(s.size(), 38u);
  EXPECT_EQ(s.Columns({FeatureFamily::kDegree}).size(), 20u);
  EXPECT_EQ(s.Columns({FeatureFamily::kConnectivity}).size(), 4u);
  EXPECT_EQ(s.Columns({FeatureFamily::kDomain}).size(), 8u);
  EXPECT_EQ(s.Columns({FeatureFamily::kKeyword}).size(), 6u);
}

TEST(KeywordFeatures, LongestMatchAndSpecials) {
  auto f = KeywordFeatures(ParseUrl("http://x.com/advert=1;banner;q"));
  EXPECT_EQ(Lookup(f, "ad_keyword_count"), 2);
  EXPECT_EQ(Lookup(f, "ad_keyword_special_count"), 2);
  // "advertise" wins over its prefix "advert".
  auto g = KeywordFeatures(ParseUrl("http://x.com/advertise"));
  EXPECT_EQ(Lookup(g, "ad_keyword_count"), 1);
  EXPECT_EQ(Lookup(g, "ad_keyword_special_count"), 0);
}

TEST(KeywordFeatures, QueryShape) {
  auto f = KeywordFeatures(ParseUrl("http://x.com/p?size=300x250&screenWidth=1024"));
  EXPECT_EQ(Lookup(f, "valid_query_structure"), 1);
  EXPECT_EQ(Lookup(f, "ad_dimension_in_query"), 1);
  EXPECT_EQ(Lookup(f, "screen_dimension_in_query"), 1);
  auto g = KeywordFeatures(ParseUrl("http://x.com/p?a=1;b=2;c=3"));
  EXPECT_EQ(Lookup(g, "semicolon_param_count"), 2);
  EXPECT_EQ(Lookup(g, "valid_query_structure"), 0);
  auto h = KeywordFeatures(ParseUrl("http://x.com/p?d=300X250"));
  EXPECT_EQ(Lookup(h, "ad_dimension_in_query"), 0);
  EXPECT_EQ(Lookup(KeywordFeatures(ParseUrl("http://x.com/")), "valid_query_structure"), 0);
}

TEST(DomainFeatures, PartyAndSubdomain) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  auto first = DomainFeatures(g, *g.FindUrl("http://example.com/img.gif"));
  EXPECT_EQ(Lookup(first, "domain_party"), 0);
  EXPECT_EQ(Lookup(first, "same_base_and_request_domain"), 1);
  auto third = DomainFeatures(g, *g.FindUrl("http://adnetwork.com/ads.gif"));
  EXPECT_EQ(Lookup(third, "domain_party"), 1);
  EXPECT_EQ(Lookup(third, "node_category_element_url"), 1);
}

// Golden rows were produced by an independent networkx-based featurizer.
TEST(FeaturizeGraph, MatchesGoldenRows) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  auto labels = LabelGraph(g, ParseRules("||adnetwork.com^"));
  Dataset data = FeaturizeGraph(g, labels, "toy");

  std::istringstream in(ReadText(FixturePath("toy_page_features.csv")));
  std::string line;
  std::getline(in, line);  // schema comment
  std::getline(in, line);
  std::vector<std::string> header;
  for (std::stringstream cells(line); std::getline(cells, line, ',');) header.push_back(line);
  ASSERT_EQ(header.size(), DefaultSchema().size() + 3);
  for (std::size_t c = 0; c < DefaultSchema().size(); ++c)
    EXPECT_EQ(header[c], DefaultSchema().features[c].name);

  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    for (std::stringstream ss(line); std::getline(ss, line, ',');) cells.push_back(line);
    ASSERT_LT(row, data.rows.size());
    const DatasetRow& actual = data.rows[row++];
    EXPECT_EQ(std::to_string(actual.node_id), cells.back());
    EXPECT_EQ(std::string(ToString(actual.label)), cells[cells.size() - 3]);
    for (std::size_t c = 0; c < DefaultSchema().size(); ++c)
      EXPECT_NEAR(actual.values[c], std::stod(cells[c]), 1e-9)
          << header[c] << " of node " << actual.node_id;
  }
  EXPECT_EQ(row, data.rows.size());
}

TEST(Dataset, CsvRoundTripAndSelect) {
  PageGraph g = testing::LoadFixtureGraph("toy_page.jsonl");
  Dataset data = FeaturizeGraph(g, LabelGraph(g, ParseRules("||adnetwork.com^")), "toy");
  EXPECT_EQ(DatasetFromCsv(DatasetToCsv(data, "h")), data);
  Dataset kw = data.Select({FeatureFamily::kKeyword});
  EXPECT_EQ(kw.schema.size(), 6u);
  EXPECT_EQ(kw.rows.size(), data.rows.size());
  EXPECT_THROW(data.Append(kw), DatasetError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(3), "3");
  EXPECT_EQ(std::stod(FormatNumber(1.0 / 3)), 1.0 / 3);
}

}  // namespace
}  // namespace adsieve
