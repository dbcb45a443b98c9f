#include "adsieve/url.hpp"

#include <algorithm>
#include <cctype>

#include "adsieve/error.hpp"

namespace adsieve {

namespace {

bool IsSchemeChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
         c == '-' || c == '.';
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Returns the scheme if `s` starts with one, else empty.
std::string_view LeadingScheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return {};
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] == ':') return s.substr(0, i);
    if (!IsSchemeChar(s[i])) return {};
  }
  return {};
}

// RFC 3986 5.2.4.
std::string RemoveDotSegments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.starts_with("../")) {
      in.erase(0, 3);
    } else if (in.starts_with("./")) {
      in.erase(0, 2);
    } else if (in.starts_with("/./")) {
      in.erase(0, 2);
    } else if (in == "/.") {
      in = "/";
    } else if (in.starts_with("/../") || in == "/..") {
      in = in == "/.." ? "/" : in.substr(3);
      std::size_t last = out.rfind('/');
      out.erase(last == std::string::npos ? 0 : last);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t start = in[0] == '/' ? 1 : 0;
      std::size_t next = in.find('/', start);
      if (next == std::string::npos) next = in.size();
      out += in.substr(0, next);
      in.erase(0, next);
    }
  }
  return out;
}

struct Components {
  std::string scheme;
  bool has_authority = false;
  std::string authority;
  std::string path;
  bool has_query = false;
  std::string query;
  bool has_fragment = false;
  std::string fragment;
};

Components Split(std::string_view s) {
  Components c;
  std::string_view scheme = LeadingScheme(s);
  if (!scheme.empty()) {
    c.scheme = Lower(scheme);
    s.remove_prefix(scheme.size() + 1);
  }
  if (s.starts_with("//")) {
    s.remove_prefix(2);
    std::size_t end = s.find_first_of("/?#");
    if (end == std::string_view::npos) end = s.size();
    c.has_authority = true;
    c.authority = std::string(s.substr(0, end));
    s.remove_prefix(end);
  }
  std::size_t hash = s.find('#');
  if (hash != std::string_view::npos) {
    c.has_fragment = true;
    c.fragment = std::string(s.substr(hash + 1));
    s = s.substr(0, hash);
  }
  std::size_t q = s.find('?');
  if (q != std::string_view::npos) {
    c.has_query = true;
    c.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  c.path = std::string(s);
  return c;
}

// RFC 3986 5.2.2 on split components.
Components Resolve(const Components& ref, const Components& base) {
  Components t;
  if (!ref.scheme.empty()) {
    t = ref;
    t.path = RemoveDotSegments(ref.path);
    return t;
  }
  t.scheme = base.scheme;
  if (ref.has_authority) {
    t.has_authority = true;
    t.authority = ref.authority;
    t.path = RemoveDotSegments(ref.path);
    t.has_query = ref.has_query;
    t.query = ref.query;
  } else {
    t.has_authority = base.has_authority;
    t.authority = base.authority;
    if (ref.path.empty()) {
      t.path = base.path;
      t.has_query = ref.has_query || base.has_query;
      t.query = ref.has_query ? ref.query : base.query;
    } else {
      if (ref.path.starts_with("/")) {
        t.path = RemoveDotSegments(ref.path);
      } else {
        std::string merged;
        if (base.has_authority && base.path.empty()) {
          merged = "/" + ref.path;
        } else {
          std::size_t slash = base.path.rfind('/');
          merged = (slash == std::string::npos ? std::string()
                                               : base.path.substr(0, slash + 1)) +
                   ref.path;
        }
        t.path = RemoveDotSegments(merged);
      }
      t.has_query = ref.has_query;
      t.query = ref.query;
    }
  }
  t.has_fragment = ref.has_fragment;
  t.fragment = ref.fragment;
  return t;
}

bool IsValidHostChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
         c == '_' || c == '[' || c == ']' || c == ':' || c == '%';
}

}  // namespace

std::string NormalizePercentEncoding(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i + 2 < out.size(); ++i) {
    if (out[i] == '%' && std::isxdigit(static_cast<unsigned char>(out[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(out[i + 2]))) {
      out[i + 1] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 1])));
      out[i + 2] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[i + 2])));
      i += 2;
    }
  }
  return out;
}

std::vector<QueryParam> SplitQuery(std::string_view query) {
  std::vector<QueryParam> params;
  if (query.empty()) return params;
  char sep = '&';
  std::size_t start = 0;
  while (true) {
    std::size_t end = query.find_first_of("&;", start);
    std::string_view token =
        query.substr(start, end == std::string_view::npos ? end : end - start);
    QueryParam p;
    p.separator = sep;
    std::size_t eq = token.find('=');
    if (eq == std::string_view::npos) {
      p.name = std::string(token);
    } else {
      p.name = std::string(token.substr(0, eq));
      p.value = std::string(token.substr(eq + 1));
      p.has_value = true;
    }
    params.push_back(std::move(p));
    if (end == std::string_view::npos) break;
    sep = query[end];
    start = end + 1;
  }
  return params;
}

void UpdateDomainFields(ParsedUrl& url, const PublicSuffixList& psl) {
  url.registrable_domain = psl.RegistrableDomain(url.host);
  url.subdomain_labels.clear();
  if (url.registrable_domain.size() + 1 < url.host.size()) {
    std::string_view sub(url.host);
    sub = sub.substr(0, url.host.size() - url.registrable_domain.size() - 1);
    std::size_t start = 0;
    while (start <= sub.size()) {
      std::size_t dot = sub.find('.', start);
      if (dot == std::string_view::npos) dot = sub.size();
      url.subdomain_labels.emplace_back(sub.substr(start, dot - start));
      start = dot + 1;
    }
  }
}

ParsedUrl ParseUrl(std::string_view raw, std::string_view base,
                   const PublicSuffixList& psl) {
  std::string_view trimmed = raw;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
    trimmed.remove_prefix(1);
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
    trimmed.remove_suffix(1);
  if (trimmed.empty()) throw UrlError("empty url");

  Components ref = Split(trimmed);
  Components c;
  if (!ref.scheme.empty()) {
    c = Resolve(ref, Components{});
  } else {
    if (base.empty()) throw UrlError("relative url without base: " + std::string(raw));
    Components b = Split(base);
    if (b.scheme.empty() || !b.has_authority)
      throw UrlError("base is not absolute: " + std::string(base));
    c = Resolve(ref, b);
  }
  if (c.scheme != "http" && c.scheme != "https" && c.scheme != "ws" &&
      c.scheme != "wss")
    throw UrlError("unsupported scheme '" + c.scheme + "' in " + std::string(raw));
  if (!c.has_authority) throw UrlError("missing host in " + std::string(raw));

  ParsedUrl url;
  url.raw = std::string(raw);
  url.scheme = c.scheme;
  std::string_view authority = c.authority;
  if (std::size_t at = authority.rfind('@'); at != std::string_view::npos) {
    url.userinfo = std::string(authority.substr(0, at));
    authority.remove_prefix(at + 1);
  }
  std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos &&
      authority.find(']', colon) == std::string_view::npos) {
    url.port = std::string(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
    if (!std::all_of(url.port.begin(), url.port.end(),
                     [](unsigned char ch) { return std::isdigit(ch); }))
      throw UrlError("bad port in " + std::string(raw));
  }
  url.host = Lower(authority);
  if (!url.host.empty() && url.host.back() == '.') url.host.pop_back();
  if (url.host.empty()) throw UrlError("empty host in " + std::string(raw));
  if (!std::all_of(url.host.begin(), url.host.end(), IsValidHostChar) ||
      url.host.starts_with(".") || url.host.find("..") != std::string::npos)
    throw UrlError("invalid host '" + url.host + "'");
  UpdateDomainFields(url, psl);

  url.path = NormalizePercentEncoding(c.path);
  url.had_question_mark = c.has_query;
  if (c.has_query) {
    url.query_params = SplitQuery(NormalizePercentEncoding(c.query));
  } else {
    // Matrix-style parameters (";k=v") in the last path segment.
    std::size_t slash = url.path.rfind('/');
    std::size_t seg = slash == std::string::npos ? 0 : slash + 1;
    if (url.path.find(';', seg) != std::string::npos) {
      url.query_params = SplitQuery(std::string_view(url.path).substr(seg));
      url.path.erase(seg);
    }
  }
  url.had_fragment = c.has_fragment;
  url.fragment = NormalizePercentEncoding(c.fragment);
  return url;
}

std::string ParsedUrl::QueryString() const {
  std::string out;
  for (std::size_t i = 0; i < query_params.size(); ++i) {
    const QueryParam& p = query_params[i];
    if (i > 0) out += p.separator;
    out += p.name;
    if (p.has_value) {
      out += '=';
      out += p.value;
    }
  }
  return out;
}

std::string ParsedUrl::Serialize() const {
  std::string out = scheme + "://";
  if (!userinfo.empty()) out += userinfo + "@";
  out += host;
  if (!port.empty()) out += ":" + port;
  out += path;
  if (had_question_mark) out += '?';
  out += QueryString();
  if (had_fragment) out += "#" + fragment;
  return out;
}

int ParsedUrl::SemicolonParamCount() const {
  return static_cast<int>(std::count_if(
      query_params.begin(), query_params.end(),
      [](const QueryParam& p) { return p.separator == ';'; }));
}

bool IsThirdParty(const ParsedUrl& url, std::string_view page_registrable_domain) {
  return url.registrable_domain != page_registrable_domain;
}

}  // namespace adsieve
