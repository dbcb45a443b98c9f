#ifndef ADSIEVE_PUBLIC_SUFFIX_HPP_
#define ADSIEVE_PUBLIC_SUFFIX_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

namespace adsieve {

// Public-suffix rule set in the publicsuffix.org text format
// (normal rules, `*.` wildcards, `!` exceptions, `//` comments).
class PublicSuffixList {
 public:
  PublicSuffixList() = default;

  static PublicSuffixList FromText(std::string_view text,
                                   std::string version = "custom");
  static PublicSuffixList FromFile(const std::filesystem::path& path);

  // Snapshot compiled into the library.
  static const PublicSuffixList& Bundled();

  // Longest public suffix of `host` under the prevailing rule. Hosts with
  // no matching rule fall back to the implicit `*` rule (last label).
  std::string PublicSuffix(std::string_view host) const;

  // eTLD+1. Returns `host` itself when the host is an IP literal, a single
  // label, or is itself a public suffix.
  std::string RegistrableDomain(std::string_view host) const;

  const std::string& version() const { return version_; }
  std::size_t rule_count() const {
    return rules_.size() + wildcards_.size() + exceptions_.size();
  }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;  // stored without "*."
  std::unordered_set<std::string> exceptions_;  // stored without "!"
  std::string version_;
};

bool IsIpLiteral(std::string_view host);

}  // namespace adsieve

#endif  // ADSIEVE_PUBLIC_SUFFIX_HPP_
