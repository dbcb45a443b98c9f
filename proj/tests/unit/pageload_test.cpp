#include <gtest/gtest.h>

#include "adsieve/error.hpp"
#include "adsieve/pageload.hpp"
#include "support.hpp"

namespace adsieve {
namespace {

using testing::FixturePath;
using testing::ReadText;

TEST(ParseLog, ToyPage) {
  PageLoadLog log = ReadLogFile(FixturePath("toy_page.jsonl"));
  EXPECT_EQ(log.page_url, "http://example.com/");
  int documents = 0, referenced = 0, inline_scripts = 0, roots = 0;
  for (const Event& e : log.events) {
    if (auto* r = std::get_if<HttpRequest>(&e.payload))
      documents += r->resource_kind == ResourceKind::kDocument;
    if (auto* s = std::get_if<ScriptUnit>(&e.payload))
      (s->scope == ScriptScope::kReferenced ? referenced : inline_scripts) += 1;
    if (auto* d = std::get_if<DomNode>(&e.payload)) {
      if (!d->parent_id) {
        ++roots;
        EXPECT_EQ(d->elem_id, "html");
      }
    }
  }
  EXPECT_EQ(documents, 1);
  EXPECT_EQ(referenced, 2);
  EXPECT_EQ(inline_scripts, 1);
  EXPECT_EQ(roots, 1);
}

TEST(ParseLog, EmptyEventList) {
  PageLoadLog log = ReadLogFile(FixturePath("empty_events.jsonl"));
  EXPECT_TRUE(log.events.empty());
}

TEST(ParseLog, DanglingTargetNamesTheId) {
  try {
    ReadLogFile(FixturePath("dangling_target.jsonl"));
    FAIL() << "expected IntegrityError";
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.id(), "ghost42");
  }
}

TEST(ParseLog, MissingHeader) {
  EXPECT_THROW(ReadLogFile(FixturePath("missing_header.jsonl")), HeaderError);
}

TEST(ParseLog, MalformedLineCarriesLineNumber) {
  try {
    ReadLogFile(FixturePath("malformed_line.jsonl"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(ParseLog, SeqMustNotDecrease) {
  std::string text =
      "{\"page_url\": \"http://a.com/\"}\n"
      "{\"seq\": 2, \"type\": \"DomNode\", \"elem_id\": \"h\", \"tag_name\": \"html\", "
      "\"parent_id\": null, \"attributes\": {}, \"base_uri\": \"http://a.com/\"}\n"
      "{\"seq\": 1, \"type\": \"DomNode\", \"elem_id\": \"b\", \"tag_name\": \"body\", "
      "\"parent_id\": \"h\", \"attributes\": {}, \"base_uri\": \"http://a.com/\"}\n";
  EXPECT_THROW(ParseLog(text), DataError);
}

TEST(SerializeLog, RoundTrips) {
  for (const char* name : {"toy_page.jsonl", "toy_page_core.jsonl", "empty_events.jsonl"}) {
    PageLoadLog log = ReadLogFile(FixturePath(name));
    EXPECT_EQ(ParseLog(SerializeLog(log)), log) << name;
    EXPECT_EQ(SerializeLog(ParseLog(SerializeLog(log))), SerializeLog(log)) << name;
  }
}

}  // namespace
}  // namespace adsieve
