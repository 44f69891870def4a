#include "sift/url.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <vector>

namespace sift {

namespace {

bool IsSchemeChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
         c == '-' || c == '.';
}

std::vector<std::string_view> SplitLabels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = host.find('.', start);
    if (dot == std::string_view::npos) {
      labels.push_back(host.substr(start));
      break;
    }
    labels.push_back(host.substr(start, dot - start));
    start = dot + 1;
  }
  return labels;
}

std::string JoinLabels(const std::vector<std::string_view>& labels,
                       std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (i != from)
      out += '.';
    out += labels[i];
  }
  return out;
}

// Decodes UTF-8 into code points; nullopt on malformed input.
std::optional<std::vector<char32_t>> DecodeUtf8(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    auto b = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      extra = 1;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      extra = 2;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      extra = 3;
    } else {
      return std::nullopt;
    }
    if (i + extra >= s.size())
      return std::nullopt;
    for (int k = 1; k <= extra; ++k) {
      auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80)
        return std::nullopt;
      cp = (cp << 6) | (c & 0x3F);
    }
    out.push_back(cp);
    i += 1 + extra;
  }
  return out;
}

char PunycodeDigit(std::uint32_t d) {
  return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
}

std::uint32_t AdaptBias(std::uint32_t delta, std::uint32_t num_points,
                        bool first_time) {
  constexpr std::uint32_t kBase = 36, kTmin = 1, kTmax = 26, kSkew = 38,
                          kDamp = 700;
  delta = first_time ? delta / kDamp : delta / 2;
  delta += delta / num_points;
  std::uint32_t k = 0;
  while (delta > ((kBase - kTmin) * kTmax) / 2) {
    delta /= kBase - kTmin;
    k += kBase;
  }
  return k + (((kBase - kTmin + 1) * delta) / (delta + kSkew));
}

}  // namespace

UrlError::UrlError(std::string text, const std::string& reason)
    : std::runtime_error("invalid URL '" + text + "': " + reason),
      text_(std::move(text)) {}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z')
      c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool IsIpAddress(std::string_view host) {
  if (host.find(':') != std::string_view::npos)
    return true;  // IPv6, brackets already stripped
  int parts = 0;
  std::size_t start = 0;
  while (start <= host.size()) {
    std::size_t dot = host.find('.', start);
    std::string_view part = host.substr(
        start, dot == std::string_view::npos ? std::string_view::npos
                                             : dot - start);
    if (part.empty() || part.size() > 3 ||
        !std::all_of(part.begin(), part.end(),
                     [](char c) { return c >= '0' && c <= '9'; }))
      return false;
    if (std::stoi(std::string(part)) > 255)
      return false;
    ++parts;
    if (dot == std::string_view::npos)
      break;
    start = dot + 1;
  }
  return parts == 4;
}

UrlParts SplitUrl(std::string_view url) {
  std::string text(url);
  std::size_t sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0)
    throw UrlError(text, "missing scheme");
  if (!std::isalpha(static_cast<unsigned char>(url[0])) ||
      !std::all_of(url.begin(), url.begin() + sep, IsSchemeChar))
    throw UrlError(text, "malformed scheme");

  std::size_t authority_begin = sep + 3;
  std::size_t authority_end = url.find_first_of("/?#", authority_begin);
  if (authority_end == std::string_view::npos)
    authority_end = url.size();
  std::string_view authority =
      url.substr(authority_begin, authority_end - authority_begin);

  std::size_t host_begin = authority_begin;
  std::size_t at = authority.rfind('@');
  if (at != std::string_view::npos)
    host_begin = authority_begin + at + 1;
  std::string_view host_port = url.substr(host_begin, authority_end - host_begin);

  std::string_view host;
  std::string_view port;
  std::size_t host_offset = host_begin;
  if (!host_port.empty() && host_port.front() == '[') {
    std::size_t close = host_port.find(']');
    if (close == std::string_view::npos)
      throw UrlError(text, "unterminated IPv6 literal");
    host = host_port.substr(1, close - 1);
    host_offset = host_begin + 1;
    std::string_view rest = host_port.substr(close + 1);
    if (!rest.empty()) {
      if (rest.front() != ':')
        throw UrlError(text, "garbage after IPv6 literal");
      port = rest.substr(1);
    }
  } else {
    std::size_t colon = host_port.find(':');
    host = host_port.substr(0, colon);
    if (colon != std::string_view::npos)
      port = host_port.substr(colon + 1);
  }
  if (host.empty())
    throw UrlError(text, "missing host");
  for (char c : host) {
    auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || u == 0x7F || c == '\\' || c == '<' || c == '>' ||
        c == '"' || c == '%')
      throw UrlError(text, "invalid character in host");
  }
  if (!std::all_of(port.begin(), port.end(),
                   [](char c) { return c >= '0' && c <= '9'; }))
    throw UrlError(text, "non-numeric port");

  UrlParts parts;
  parts.full_url = text;
  parts.hostname = AsciiLower(host);
  if (parts.hostname.size() > 1 && parts.hostname.back() == '.')
    parts.hostname.pop_back();
  parts.host_offset = host_offset;
  std::string_view rest = url.substr(authority_end);
  std::size_t hash = rest.find('#');
  if (hash != std::string_view::npos)
    rest = rest.substr(0, hash);
  parts.path_and_query = rest.empty() || rest.front() != '/'
                             ? "/" + std::string(rest)
                             : std::string(rest);
  return parts;
}

std::optional<std::string> PunycodeLabel(std::string_view utf8_label) {
  auto decoded = DecodeUtf8(utf8_label);
  if (!decoded)
    return std::nullopt;
  const std::vector<char32_t>& input = *decoded;

  std::string output;
  for (char32_t cp : input) {
    if (cp < 0x80)
      output += static_cast<char>(cp);
  }
  const std::uint32_t basic = static_cast<std::uint32_t>(output.size());
  if (basic == input.size())
    return output;
  if (basic > 0)
    output += '-';

  constexpr std::uint32_t kBase = 36, kTmin = 1, kTmax = 26;
  std::uint32_t n = 128, delta = 0, bias = 72, handled = basic;
  while (handled < input.size()) {
    std::uint32_t m = 0xFFFFFFFF;
    for (char32_t cp : input) {
      if (cp >= n && cp < m)
        m = cp;
    }
    delta += (m - n) * (handled + 1);
    n = m;
    for (char32_t cp : input) {
      if (cp < n)
        ++delta;
      if (cp == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = kBase;; k += kBase) {
          std::uint32_t t =
              k <= bias ? kTmin : (k >= bias + kTmax ? kTmax : k - bias);
          if (q < t)
            break;
          output += PunycodeDigit(t + (q - t) % (kBase - t));
          q = (q - t) / (kBase - t);
        }
        output += PunycodeDigit(q);
        bias = AdaptBias(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return "xn--" + output;
}

PublicSuffixList PublicSuffixList::Parse(std::istream& in) {
  PublicSuffixList psl;
  std::string line;
  auto add = [&psl](std::unordered_set<std::string>& set,
                    const std::string& rule) {
    set.insert(rule);
    // Rules with non-ASCII labels are also stored in their punycode form.
    bool ascii = std::all_of(rule.begin(), rule.end(), [](char c) {
      return static_cast<unsigned char>(c) < 0x80;
    });
    if (ascii)
      return;
    std::string encoded;
    for (std::string_view label : SplitLabels(rule)) {
      auto puny = PunycodeLabel(label);
      if (!puny)
        return;
      if (!encoded.empty())
        encoded += '.';
      encoded += *puny;
    }
    set.insert(encoded);
  };
  while (std::getline(in, line)) {
    // A rule is the first whitespace-delimited token on the line.
    std::size_t end = line.find_first_of(" \t\r");
    std::string rule = AsciiLower(line.substr(0, end));
    if (rule.empty() || rule.rfind("//", 0) == 0)
      continue;
    ++psl.rule_count_;
    if (rule[0] == '!') {
      add(psl.exception_, rule.substr(1));
    } else if (rule.rfind("*.", 0) == 0) {
      add(psl.wildcard_, rule.substr(2));
    } else {
      add(psl.exact_, rule);
    }
  }
  return psl;
}

PublicSuffixList PublicSuffixList::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open public suffix list: " + path);
  PublicSuffixList psl = Parse(in);
  if (in.bad())
    throw std::runtime_error("error reading public suffix list: " + path);
  if (psl.rule_count() == 0)
    throw std::runtime_error("public suffix list has no rules: " + path);
  return psl;
}

std::optional<std::string> PublicSuffixList::RegistrableDomain(
    std::string_view raw_host) const {
  std::string host = AsciiLower(raw_host);
  if (host.empty() || host.front() == '.')
    return std::nullopt;
  if (host.back() == '.')
    host.pop_back();
  std::vector<std::string_view> labels = SplitLabels(host);
  if (std::any_of(labels.begin(), labels.end(),
                  [](std::string_view l) { return l.empty(); }))
    return std::nullopt;

  const std::size_t n = labels.size();
  std::size_t suffix_labels = 1;  // implicit "*" rule
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = n - i;
    if (len <= suffix_labels)
      break;
    if (exact_.count(JoinLabels(labels, i)) ||
        (i + 1 < n && wildcard_.count(JoinLabels(labels, i + 1)))) {
      suffix_labels = len;
      break;
    }
  }
  // Exception rules override any other match.
  for (std::size_t i = 0; i < n; ++i) {
    if (exception_.count(JoinLabels(labels, i))) {
      suffix_labels = n - i - 1;
      break;
    }
  }
  if (n <= suffix_labels)
    return std::nullopt;
  return JoinLabels(labels, n - suffix_labels - 1);
}

UrlParts DecomposeUrl(std::string_view url, const PublicSuffixList& psl) {
  UrlParts parts = SplitUrl(url);
  const std::string& host = parts.hostname;
  if (IsIpAddress(host) || host.find('.') == std::string::npos) {
    parts.registrable_domain = host;
    return parts;
  }
  std::optional<std::string> domain = psl.RegistrableDomain(host);
  parts.registrable_domain = domain ? *domain : host;
  return parts;
}

}  // namespace sift
