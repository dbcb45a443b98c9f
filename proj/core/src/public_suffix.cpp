#include "adsieve/public_suffix.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "adsieve/error.hpp"

namespace adsieve {

namespace {

constexpr char kBundledVersion[] = "psl-subset-2024.06";

// A curated slice of the public suffix list: the generic TLDs, the
// country-code second levels the synthetic corpus and tests use, and a
// handful of private-section entries including wildcard/exception rules.
constexpr char kBundledRules[] = R"PSL(
// ===BEGIN ICANN DOMAINS===
com
net
org
edu
gov
mil
int
info
biz
io
co
me
tv
us
ai
app
dev
xyz
online
site
top
// uk
uk
ac.uk
co.uk
gov.uk
ltd.uk
me.uk
net.uk
org.uk
plc.uk
sch.uk
// jp
jp
ac.jp
co.jp
go.jp
ne.jp
or.jp
// au
au
com.au
net.au
org.au
edu.au
gov.au
// br
br
com.br
net.br
org.br
// cn
cn
com.cn
net.cn
org.cn
// in
in
co.in
net.in
org.in
// misc ccTLDs
de
fr
nl
it
es
ru
ca
ch
se
no
pl
be
at
dk
fi
kr
co.kr
nz
co.nz
za
co.za
mx
com.mx
// wildcard + exception examples
*.ck
!www.ck
*.kawasaki.jp
!city.kawasaki.jp
// ===END ICANN DOMAINS===
// ===BEGIN PRIVATE DOMAINS===
blogspot.com
appspot.com
github.io
herokuapp.com
cloudfront.net
azurewebsites.net
s3.amazonaws.com
*.compute.amazonaws.com
// ===END PRIVATE DOMAINS===
)PSL";

std::vector<std::string_view> SplitLabels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    std::size_t dot = host.find('.', start);
    if (dot == std::string_view::npos) dot = host.size();
    labels.push_back(host.substr(start, dot - start));
    start = dot + 1;
  }
  return labels;
}

std::string JoinFrom(const std::vector<std::string_view>& labels,
                     std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < labels.size(); ++i) {
    if (i != first) out += '.';
    out += labels[i];
  }
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

bool IsIpLiteral(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[') return true;  // IPv6
  int dots = 0;
  for (char c : host) {
    if (c == '.') {
      ++dots;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return dots == 3;
}

PublicSuffixList PublicSuffixList::FromText(std::string_view text,
                                            std::string version) {
  PublicSuffixList list;
  list.version_ = std::move(version);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    // A rule is the first whitespace-delimited token.
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) continue;
    line = line.substr(b);
    line = line.substr(0, line.find_first_of(" \t\r"));
    if (line.empty() || line.starts_with("//")) continue;
    std::string rule = Lower(line);
    if (rule.starts_with("!")) {
      list.exceptions_.insert(rule.substr(1));
    } else if (rule.starts_with("*.")) {
      list.wildcards_.insert(rule.substr(2));
    } else {
      list.rules_.insert(rule);
    }
  }
  return list;
}

PublicSuffixList PublicSuffixList::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open public suffix file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromText(buffer.str(), path.filename().string());
}

const PublicSuffixList& PublicSuffixList::Bundled() {
  static const PublicSuffixList list = FromText(kBundledRules, kBundledVersion);
  return list;
}

std::string PublicSuffixList::PublicSuffix(std::string_view host) const {
  std::string lowered = Lower(host);
  if (!lowered.empty() && lowered.back() == '.') lowered.pop_back();
  const auto labels = SplitLabels(lowered);
  // Scan suffixes from longest to shortest; the first hit has the most
  // labels. Exceptions outrank everything.
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string suffix = JoinFrom(labels, i);
    if (exceptions_.contains(suffix)) return JoinFrom(labels, i + 1);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::string suffix = JoinFrom(labels, i);
    if (rules_.contains(suffix)) return suffix;
    if (i + 1 < labels.size() && wildcards_.contains(JoinFrom(labels, i + 1)))
      return suffix;
  }
  return labels.empty() ? std::string() : std::string(labels.back());
}

std::string PublicSuffixList::RegistrableDomain(std::string_view host) const {
  std::string lowered = Lower(host);
  if (!lowered.empty() && lowered.back() == '.') lowered.pop_back();
  if (IsIpLiteral(lowered) || lowered.find('.') == std::string::npos)
    return lowered;
  const std::string suffix = PublicSuffix(lowered);
  if (suffix.size() >= lowered.size()) return lowered;
  // One label to the left of the public suffix.
  const std::size_t suffix_start = lowered.size() - suffix.size();
  const std::size_t dot = lowered.rfind('.', suffix_start - 2);
  return dot == std::string::npos ? lowered : lowered.substr(dot + 1);
}

}  // namespace adsieve
