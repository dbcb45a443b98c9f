#include <gtest/gtest.h>

#include "adsieve/error.hpp"
#include "adsieve/public_suffix.hpp"
#include "adsieve/url.hpp"

namespace adsieve {
namespace {

TEST(ParseUrl, SingleQueryParam) {
  ParsedUrl u = ParseUrl("http://adnetwork.com/ads.gif?x=1", "http://example.com/");
  EXPECT_EQ(u.host, "adnetwork.com");
  EXPECT_EQ(u.registrable_domain, "adnetwork.com");
  EXPECT_TRUE(u.subdomain_labels.empty());
  ASSERT_EQ(u.query_params.size(), 1u);
  EXPECT_EQ(u.query_params[0].name, "x");
  EXPECT_EQ(u.query_params[0].value, "1");
  EXPECT_EQ(u.query_params[0].separator, '&');
  EXPECT_TRUE(u.had_question_mark);
}

TEST(ParseUrl, NoQuery) {
  ParsedUrl u = ParseUrl("http://a.com/", "http://a.com/");
  EXPECT_TRUE(u.query_params.empty());
  EXPECT_FALSE(u.had_question_mark);
  EXPECT_EQ(u.Serialize(), "http://a.com/");
}

TEST(ParseUrl, TwoLevelSuffixAndSemicolon) {
  ParsedUrl u = ParseUrl("http://s.example.co.uk/p?a=1;b=2");
  EXPECT_EQ(u.registrable_domain, "example.co.uk");
  EXPECT_EQ(u.subdomain_labels, std::vector<std::string>{"s"});
  ASSERT_EQ(u.query_params.size(), 2u);
  EXPECT_EQ(u.query_params[1].separator, ';');
  EXPECT_EQ(u.SemicolonParamCount(), 1);
}

TEST(ParseUrl, ResolvesRelativeAgainstBase) {
  EXPECT_EQ(ParseUrl("../style1.css", "http://example.com/a/b.html").Serialize(),
            "http://example.com/style1.css");
  EXPECT_EQ(ParseUrl("img.gif", "http://example.com/a/b.html").Serialize(),
            "http://example.com/a/img.gif");
  EXPECT_EQ(ParseUrl("//cdn.net/x.js", "https://example.com/").Serialize(),
            "https://cdn.net/x.js");
}

TEST(ParseUrl, NormalizesCaseAndEscapes) {
  ParsedUrl u = ParseUrl("HTTP://Example.COM/a%2fb?q=%3d");
  EXPECT_EQ(u.Serialize(), "http://example.com/a%2Fb?q=%3D");
}

TEST(ParseUrl, RejectsHostless) {
  EXPECT_THROW(ParseUrl("javascript:void(0)"), UrlError);
  EXPECT_THROW(ParseUrl("data:image/png;base64,AAAA"), UrlError);
  EXPECT_THROW(ParseUrl("relative/only"), UrlError);
}

TEST(ParseUrl, IpLiteralIsItsOwnDomain) {
  ParsedUrl u = ParseUrl("http://10.0.0.1/x");
  EXPECT_EQ(u.registrable_domain, "10.0.0.1");
  EXPECT_TRUE(IsIpLiteral("10.0.0.1"));
}

TEST(SplitQuery, RecordsSeparatorsAndBareNames) {
  auto params = SplitQuery("a=1&b;c=");
  ASSERT_EQ(params.size(), 3u);
  EXPECT_FALSE(params[1].has_value);
  EXPECT_EQ(params[1].separator, '&');
  EXPECT_EQ(params[2].separator, ';');
  EXPECT_TRUE(params[2].has_value);
}

TEST(PublicSuffixList, WildcardAndException) {
  auto psl = PublicSuffixList::FromText("com\n*.ck\n!www.ck\n// comment\nco.uk\n");
  EXPECT_EQ(psl.RegistrableDomain("a.b.example.ck"), "b.example.ck");
  EXPECT_EQ(psl.RegistrableDomain("www.ck"), "www.ck");
  EXPECT_EQ(psl.RegistrableDomain("x.y.co.uk"), "y.co.uk");
  EXPECT_EQ(psl.RegistrableDomain("co.uk"), "co.uk");
  // Unknown TLD falls back to the implicit rule.
  EXPECT_EQ(psl.RegistrableDomain("a.b.zz"), "b.zz");
}

TEST(ThirdParty, RegistrableDomainInequality) {
  EXPECT_FALSE(IsThirdParty(ParseUrl("http://cdn.example.com/x"), "example.com"));
  EXPECT_TRUE(IsThirdParty(ParseUrl("http://example.net/x"), "example.com"));
}

}  // namespace
}  // namespace adsieve
