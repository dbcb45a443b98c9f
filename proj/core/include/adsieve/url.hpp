#ifndef ADSIEVE_URL_HPP_
#define ADSIEVE_URL_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "adsieve/public_suffix.hpp"

namespace adsieve {

struct QueryParam {
  std::string name;
  std::string value;
  bool has_value = false;  // "a" vs "a="
  // Separator that precedes the parameter in the raw query. The first
  // parameter is recorded as '&'.
  char separator = '&';

  bool operator==(const QueryParam&) const = default;
};

struct ParsedUrl {
  std::string raw;  // input as given, before resolution
  std::string scheme;
  std::string userinfo;
  std::string host;
  std::string port;
  std::string registrable_domain;
  std::vector<std::string> subdomain_labels;
  std::string path;
  std::vector<QueryParam> query_params;
  bool had_question_mark = false;
  std::string fragment;
  bool had_fragment = false;

  // Normalized absolute form: lowercase scheme/host, uppercase percent
  // escapes. This string is the identity of an HTTP node.
  std::string Serialize() const;
  // Query portion without the leading '?'.
  std::string QueryString() const;
  // Count of parameters introduced by ';'.
  int SemicolonParamCount() const;

  bool operator==(const ParsedUrl&) const = default;
};

// Parses `raw`, resolving it against `base` when it is relative.
// Throws UrlError for input with no usable host (data:, javascript:,
// about:blank, relative input without a base, ...).
ParsedUrl ParseUrl(std::string_view raw, std::string_view base = {},
                   const PublicSuffixList& psl = PublicSuffixList::Bundled());

// Recomputes registrable_domain and subdomain_labels after `host` changed.
void UpdateDomainFields(ParsedUrl& url,
                        const PublicSuffixList& psl = PublicSuffixList::Bundled());

// Uppercases the hex digits of every %XX escape.
std::string NormalizePercentEncoding(std::string_view s);

// Splits a query string on '&' and ';', recording separators.
std::vector<QueryParam> SplitQuery(std::string_view query);

// True when registrable domains differ.
bool IsThirdParty(const ParsedUrl& url, std::string_view page_registrable_domain);

}  // namespace adsieve

#endif  // ADSIEVE_URL_HPP_
