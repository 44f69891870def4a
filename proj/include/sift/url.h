#ifndef SIFT_URL_H_
#define SIFT_URL_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>

namespace sift {

// Thrown when a URL cannot be split into scheme, host and path.
class UrlError : public std::runtime_error {
 public:
  UrlError(std::string text, const std::string& reason);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

// Result of splitting an absolute URL. |host_offset| is the byte index of
// the first host character inside |full_url|, used by domain-anchored
// filter matching.
struct UrlParts {
  std::string full_url;
  std::string hostname;
  std::string registrable_domain;
  std::string path_and_query;
  std::size_t host_offset = 0;

  bool operator==(const UrlParts&) const = default;
};

// Splits |url| without consulting the suffix list. registrable_domain is
// left empty. Throws UrlError.
UrlParts SplitUrl(std::string_view url);

bool IsIpAddress(std::string_view host);

// Public Suffix List snapshot in the public_suffix_list.dat format.
class PublicSuffixList {
 public:
  static PublicSuffixList Parse(std::istream& in);
  static PublicSuffixList LoadFile(const std::string& path);

  // eTLD+1 of |host|, or nullopt when the host is itself a public suffix,
  // is empty, or starts with a dot. Mirrors checkPublicSuffix() in the
  // reference test file, including the implicit "*" rule.
  std::optional<std::string> RegistrableDomain(std::string_view host) const;

  std::size_t rule_count() const { return rule_count_; }

 private:
  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   // stored without "*."
  std::unordered_set<std::string> exception_;  // stored without "!"
  std::size_t rule_count_ = 0;
};

// Lower-cases the host and fills registrable_domain. IP hosts, single-label
// hosts and hosts that are themselves public suffixes group under the host
// verbatim.
UrlParts DecomposeUrl(std::string_view url, const PublicSuffixList& psl);

// ASCII lower-casing; bytes >= 0x80 pass through unchanged.
std::string AsciiLower(std::string_view s);

// RFC 3492 encoding of one UTF-8 label, returned with the "xn--" prefix.
// Returns nullopt for malformed UTF-8. ASCII-only labels are returned as is.
std::optional<std::string> PunycodeLabel(std::string_view utf8_label);

}  // namespace sift

#endif  // SIFT_URL_H_
