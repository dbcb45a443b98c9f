#include "adsieve/filter.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "adsieve/error.hpp"

namespace adsieve {

namespace {

struct TypeOption {
  std::string_view name;
  ResourceKind kind;
};

constexpr TypeOption kTypeOptions[] = {
    {"script", ResourceKind::kScript},
    {"image", ResourceKind::kImage},
    {"stylesheet", ResourceKind::kStylesheet},
    {"subdocument", ResourceKind::kIframe},
};

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = s.find(sep, start);
    out.push_back(s.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

bool IsSeparatorChar(char c) {
  return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           c == '%' || c == '-');
}

bool IsIdentifier(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

bool DomainListMatches(std::string_view host, const std::vector<std::string>& include,
                       const std::vector<std::string>& exclude) {
  auto covers = [host](const std::string& d) {
    return host == d ||
           (host.size() > d.size() && host.ends_with(d) &&
            host[host.size() - d.size() - 1] == '.');
  };
  if (std::any_of(exclude.begin(), exclude.end(), covers)) return false;
  return include.empty() || std::any_of(include.begin(), include.end(), covers);
}

// Splits "a.com|~b.com" (or ',' for hiding rules) into include/exclude.
bool ParseDomainList(std::string_view list, char sep, std::vector<std::string>* include,
                     std::vector<std::string>* exclude) {
  for (std::string_view d : Split(list, sep)) {
    d = Trim(d);
    bool negated = d.starts_with("~");
    if (negated) d.remove_prefix(1);
    if (d.empty()) return false;
    (negated ? exclude : include)->push_back(Lower(d));
  }
  return true;
}

std::string JoinDomains(const std::vector<std::string>& include,
                        const std::vector<std::string>& exclude, char sep) {
  std::string out;
  for (const auto& d : include) {
    if (!out.empty()) out += sep;
    out += d;
  }
  for (const auto& d : exclude) {
    if (!out.empty()) out += sep;
    out += "~" + d;
  }
  return out;
}

// Longest run of literal pattern characters, lowercased.
std::string LiteralHint(std::string_view pattern) {
  std::string best, cur;
  for (char c : pattern) {
    if (c == '*' || c == '^') {
      if (cur.size() > best.size()) best = cur;
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (cur.size() > best.size()) best = cur;
  return best;
}

// Anchored glob match over the URL string, simulated as an NFA over
// pattern positions. Characters inside [host_begin, host_end) compare
// case-insensitively.
bool GlobMatch(const NetworkRule& rule, std::string_view url, std::size_t host_begin,
               std::size_t host_end) {
  std::string tokens;
  for (char c : rule.pattern) {
    if (c == '*' && !tokens.empty() && tokens.back() == '*') continue;
    tokens += c;
  }
  const std::size_t t = tokens.size();
  std::vector<char> active(t + 1, 0), next(t + 1, 0);

  auto allowed_start = [&](std::size_t i) {
    if (rule.domain_anchor)
      return i == host_begin || (i > host_begin && i < host_end && url[i - 1] == '.');
    if (rule.start_anchor) return i == 0;
    return true;
  };
  auto close_wildcards = [&](std::vector<char>& set, bool at_end) {
    for (std::size_t j = 0; j < t; ++j) {
      if (!set[j]) continue;
      if (tokens[j] == '*' || (at_end && tokens[j] == '^')) set[j + 1] = 1;
    }
  };

  const std::size_t n = url.size();
  for (std::size_t i = 0; i <= n; ++i) {
    if (allowed_start(i)) active[0] = 1;
    close_wildcards(active, i == n);
    if (active[t] && (!rule.end_anchor || i == n)) return true;
    if (i == n) break;
    std::fill(next.begin(), next.end(), 0);
    const char uc = url[i];
    const bool in_host = i >= host_begin && i < host_end;
    bool any = false;
    for (std::size_t j = 0; j < t; ++j) {
      if (!active[j]) continue;
      const char tc = tokens[j];
      bool advance = false;
      if (tc == '*') {
        next[j] = 1;
        any = true;
      } else if (tc == '^') {
        advance = IsSeparatorChar(uc);
      } else if (in_host) {
        advance = std::tolower(static_cast<unsigned char>(tc)) ==
                  std::tolower(static_cast<unsigned char>(uc));
      } else {
        advance = tc == uc;
      }
      if (advance) {
        next[j + 1] = 1;
        any = true;
      }
    }
    active.swap(next);
    // No live state and no later start position: give up early.
    if (!any && (rule.start_anchor || (rule.domain_anchor && i + 1 >= host_end)))
      return false;
  }
  return false;
}

std::string UrlForMatching(const ParsedUrl& url, std::size_t* host_begin,
                           std::size_t* host_end) {
  std::string out = url.scheme + "://";
  if (!url.userinfo.empty()) out += url.userinfo + "@";
  *host_begin = out.size();
  out += url.host;
  *host_end = out.size();
  if (!url.port.empty()) out += ":" + url.port;
  out += url.path;
  if (url.had_question_mark) out += '?';
  out += url.QueryString();
  return out;
}

}  // namespace

std::string_view ToString(Label label) {
  return label == Label::kAd ? "AD" : "NON-AD";
}

std::optional<Label> ParseLabel(std::string_view s) {
  if (s == "AD") return Label::kAd;
  if (s == "NON-AD" || s == "NON_AD") return Label::kNonAd;
  return std::nullopt;
}

std::string NetworkRule::Serialize() const {
  std::string out;
  if (exception) out += "@@";
  if (domain_anchor) {
    out += "||";
  } else if (start_anchor) {
    out += "|";
  }
  out += pattern;
  if (end_anchor) out += "|";
  std::vector<std::string> options;
  if (third_party) options.push_back(*third_party ? "third-party" : "~third-party");
  if (!include_domains.empty() || !exclude_domains.empty())
    options.push_back("domain=" + JoinDomains(include_domains, exclude_domains, '|'));
  for (const TypeOption& t : kTypeOptions) {
    if (include_types & TypeBit(t.kind)) options.emplace_back(t.name);
  }
  for (const TypeOption& t : kTypeOptions) {
    if (exclude_types & TypeBit(t.kind)) options.push_back("~" + std::string(t.name));
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    out += i == 0 ? "$" : ",";
    out += options[i];
  }
  return out;
}

std::string HidingRule::Serialize() const {
  std::string out = JoinDomains(include_domains, exclude_domains, ',');
  out += "##";
  switch (selector_kind) {
    case SelectorKind::kId: out += "#"; break;
    case SelectorKind::kClass: out += "."; break;
    case SelectorKind::kTag: break;
  }
  return out + selector_value;
}

std::optional<std::variant<NetworkRule, HidingRule>> ParseRule(std::string_view line,
                                                               std::string* why) {
  auto reject = [why](std::string reason) {
    if (why) *why = std::move(reason);
    return std::nullopt;
  };
  if (why) why->clear();
  line = Trim(line);
  if (line.empty() || line.starts_with("!") || line.starts_with("[")) return std::nullopt;

  for (std::string_view marker : {"#@#", "#?#", "#$#", "#%#", "#@?#", "#@$#"}) {
    if (line.find(marker) != std::string_view::npos)
      return reject("unsupported cosmetic syntax '" + std::string(marker) + "'");
  }
  if (std::size_t hh = line.find("##"); hh != std::string_view::npos) {
    HidingRule rule;
    if (hh > 0 && !ParseDomainList(line.substr(0, hh), ',', &rule.include_domains,
                                   &rule.exclude_domains))
      return reject("bad domain list");
    std::string_view sel = line.substr(hh + 2);
    if (sel.starts_with("#")) {
      rule.selector_kind = SelectorKind::kId;
      sel.remove_prefix(1);
    } else if (sel.starts_with(".")) {
      rule.selector_kind = SelectorKind::kClass;
      sel.remove_prefix(1);
    } else {
      rule.selector_kind = SelectorKind::kTag;
    }
    if (!IsIdentifier(sel)) return reject("unsupported selector '" + std::string(line.substr(hh + 2)) + "'");
    rule.selector_value = rule.selector_kind == SelectorKind::kTag ? Lower(sel) : std::string(sel);
    return rule;
  }

  NetworkRule rule;
  if (line.starts_with("@@")) {
    rule.exception = true;
    line.remove_prefix(2);
  }
  std::string_view options;
  if (std::size_t dollar = line.rfind('$'); dollar != std::string_view::npos) {
    options = line.substr(dollar + 1);
    line = line.substr(0, dollar);
  }
  if (line.size() > 2 && line.front() == '/' && line.back() == '/')
    return reject("regular-expression rules are not supported");
  if (line.starts_with("||")) {
    rule.domain_anchor = true;
    line.remove_prefix(2);
  } else if (line.starts_with("|")) {
    rule.start_anchor = true;
    line.remove_prefix(1);
  }
  if (line.ends_with("|")) {
    rule.end_anchor = true;
    line.remove_suffix(1);
  }
  if (line.find('|') != std::string_view::npos) return reject("stray '|' in pattern");
  rule.pattern = std::string(line);
  if (rule.domain_anchor) {
    // Host part of a domain-anchored pattern is case-insensitive.
    std::size_t host_end = rule.pattern.find_first_of("/^*?:");
    std::transform(rule.pattern.begin(),
                   rule.pattern.begin() +
                       static_cast<std::ptrdiff_t>(host_end == std::string::npos ? rule.pattern.size() : host_end),
                   rule.pattern.begin(), [](unsigned char c) { return std::tolower(c); });
  }

  if (!options.empty()) {
    for (std::string_view opt : Split(options, ',')) {
      opt = Trim(opt);
      const std::string lowered = Lower(opt);
      if (lowered == "third-party" || lowered == "~third-party") {
        rule.third_party = lowered == "third-party";
        continue;
      }
      if (lowered.starts_with("domain=")) {
        if (!ParseDomainList(opt.substr(7), '|', &rule.include_domains, &rule.exclude_domains))
          return reject("bad $domain list");
        continue;
      }
      bool negated = lowered.starts_with("~");
      std::string_view name = std::string_view(lowered).substr(negated ? 1 : 0);
      auto type = std::find_if(std::begin(kTypeOptions), std::end(kTypeOptions),
                               [name](const TypeOption& t) { return t.name == name; });
      if (type == std::end(kTypeOptions))
        return reject("unsupported option '" + std::string(opt) + "'");
      (negated ? rule.exclude_types : rule.include_types) |= TypeBit(type->kind);
    }
  }
  if (rule.pattern.empty() && !rule.domain_anchor && !rule.start_anchor &&
      rule.include_domains.empty() && !rule.third_party && rule.include_types == 0)
    return reject("rule would match every request");
  return rule;
}

void FilterSet::Add(NetworkRule rule) {
  network_keys_.push_back(rule.Serialize());
  network_hints_.push_back(LiteralHint(rule.pattern));
  network_.push_back(std::move(rule));
}

void FilterSet::Add(HidingRule rule) { hiding_.push_back(std::move(rule)); }

void FilterSet::Merge(const FilterSet& other) {
  for (const auto& r : other.network_) Add(r);
  for (const auto& r : other.hiding_) Add(r);
  provenance_.insert(provenance_.end(), other.provenance_.begin(), other.provenance_.end());
}

FilterSet ParseRules(std::string_view text, std::string_view source_name,
                     ParseReport* report) {
  FilterSet set;
  set.AddProvenance(std::string(source_name));
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = Trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("!") || line.starts_with("[")) {
      if (report) ++report->comments;
      continue;
    }
    std::string why;
    auto rule = ParseRule(line, &why);
    if (!rule) {
      if (report) {
        ++report->skipped;
        report->diagnostics.push_back({line_no, std::string(line), why});
      }
      continue;
    }
    std::visit([&set](auto&& r) { set.Add(std::move(r)); }, std::move(*rule));
  }
  return set;
}

FilterSet ReadFilterFile(const std::filesystem::path& path, ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open filter list " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRules(buffer.str(), path.filename().string(), report);
}

bool RuleMatches(const NetworkRule& rule, const ParsedUrl& url, const MatchContext& ctx) {
  if (rule.third_party && *rule.third_party != ctx.is_third_party) return false;
  const TypeMask bit = TypeBit(ctx.resource_kind);
  if (rule.include_types != 0 && !(rule.include_types & bit)) return false;
  if (rule.exclude_types & bit) return false;
  if ((!rule.include_domains.empty() || !rule.exclude_domains.empty()) &&
      !DomainListMatches(ctx.page_host, rule.include_domains, rule.exclude_domains))
    return false;
  std::size_t hb = 0, he = 0;
  const std::string text = UrlForMatching(url, &hb, &he);
  return GlobMatch(rule, text, hb, he);
}

MatchResult MatchNetwork(const ParsedUrl& url, const MatchContext& ctx,
                         const FilterSet& filters) {
  std::size_t hb = 0, he = 0;
  const std::string text = UrlForMatching(url, &hb, &he);
  const std::string lowered = Lower(text);
  std::optional<std::size_t> block, allow;
  const auto& rules = filters.network_rules();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const NetworkRule& rule = rules[i];
    std::optional<std::size_t>& slot = rule.exception ? allow : block;
    // Deciding rule is the smallest canonical text; skip ones that cannot win.
    if (slot && filters.network_key(i) >= filters.network_key(*slot)) continue;
    if (rule.third_party && *rule.third_party != ctx.is_third_party) continue;
    const TypeMask bit = TypeBit(ctx.resource_kind);
    if (rule.include_types != 0 && !(rule.include_types & bit)) continue;
    if (rule.exclude_types & bit) continue;
    if ((!rule.include_domains.empty() || !rule.exclude_domains.empty()) &&
        !DomainListMatches(ctx.page_host, rule.include_domains, rule.exclude_domains))
      continue;
    const std::string hint = LiteralHint(rule.pattern);
    if (!hint.empty() && lowered.find(hint) == std::string::npos) continue;
    if (GlobMatch(rule, text, hb, he)) slot = i;
  }
  MatchResult result;
  if (block && !allow) {
    result.blocked = true;
    result.matched_rule = block;
  } else if (block && allow) {
    result.matched_rule = allow;
  }
  return result;
}

ElementView ElementView::FromRecord(const ElementRecord& rec) {
  ElementView view;
  view.tag = Lower(rec.tag_name);
  if (auto it = rec.attributes.find("id"); it != rec.attributes.end()) view.id = it->second;
  if (auto it = rec.attributes.find("class"); it != rec.attributes.end()) {
    std::istringstream in(it->second);
    std::string c;
    while (in >> c) view.classes.push_back(c);
  }
  return view;
}

bool MatchHiding(const ElementView& element, std::string_view page_host,
                 const FilterSet& filters) {
  const std::string host = Lower(page_host);
  for (const HidingRule& rule : filters.hiding_rules()) {
    if ((!rule.include_domains.empty() || !rule.exclude_domains.empty()) &&
        !DomainListMatches(host, rule.include_domains, rule.exclude_domains))
      continue;
    switch (rule.selector_kind) {
      case SelectorKind::kId:
        if (!element.id.empty() && element.id == rule.selector_value) return true;
        break;
      case SelectorKind::kClass:
        if (std::find(element.classes.begin(), element.classes.end(),
                      rule.selector_value) != element.classes.end())
          return true;
        break;
      case SelectorKind::kTag:
        if (Lower(element.tag) == rule.selector_value) return true;
        break;
    }
  }
  return false;
}

void RuleHitHistogram::Record(const MatchResult& result) {
  if (result.matched_rule) ++hits_.at(*result.matched_rule);
}

void RuleHitHistogram::Merge(const RuleHitHistogram& other) {
  if (hits_.size() < other.hits_.size()) hits_.resize(other.hits_.size(), 0);
  for (std::size_t i = 0; i < other.hits_.size(); ++i) hits_[i] += other.hits_[i];
}

std::size_t RuleHitHistogram::rules_fired() const {
  return static_cast<std::size_t>(
      std::count_if(hits_.begin(), hits_.end(), [](std::uint64_t h) { return h > 0; }));
}

}  // namespace adsieve
