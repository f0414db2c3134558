#include "aegis/util.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "aegis/error.hpp"

namespace aegis {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidEnum: return "InvalidEnum";
    case Errc::EmptyDescription: return "EmptyDescription";
    case Errc::BadVersionPattern: return "BadVersionPattern";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::MissingKey: return "MissingKey";
    case Errc::WrongThreatCount: return "WrongThreatCount";
    case Errc::NestedImpact: return "NestedImpact";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::FileMissing: return "FileMissing";
    case Errc::MalformedBundle: return "MalformedBundle";
    case Errc::NotFound: return "NotFound";
    case Errc::InvalidId: return "InvalidId";
    case Errc::Transport: return "Transport";
    case Errc::RateLimited: return "RateLimited";
    case Errc::QuotaExceeded: return "QuotaExceeded";
    case Errc::AuthFailed: return "AuthFailed";
    case Errc::ProviderRefused: return "ProviderRefused";
    case Errc::Timeout: return "Timeout";
    case Errc::MissingBinding: return "MissingBinding";
    case Errc::NoParsableObject: return "NoParsableObject";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::GenerationFailed: return "GenerationFailed";
    case Errc::NotMermaid: return "NotMermaid";
    case Errc::Precondition: return "Precondition";
    case Errc::RenderFailed: return "RenderFailed";
    case Errc::EmptyText: return "EmptyText";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonPositive: return "NonPositive";
    case Errc::EmptySample: return "EmptySample";
    case Errc::BadInput: return "BadInput";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NoComparablePairs: return "NoComparablePairs";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::MissingLlmKey: return "MissingLlmKey";
    case Errc::SessionExpired: return "SessionExpired";
    case Errc::IoError: return "IoError";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
  }
  return "Unknown";
}

namespace util {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool iequals(std::string_view a, std::string_view b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept {
  return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = haystack.find(needle);
  while (pos != std::string_view::npos) {
    ++count;
    pos = haystack.find(needle, pos + needle.size());
  }
  return count;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string truncate_with_ellipsis(std::string_view s, std::size_t max_chars) {
  static constexpr std::string_view kMarker = "...";
  if (s.size() <= max_chars) return std::string(s);
  if (max_chars <= kMarker.size()) return std::string(kMarker.substr(0, max_chars));
  std::size_t cut = max_chars - kMarker.size();
  // back off continuation bytes so a multi-byte sequence is not split
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  std::string out(s.substr(0, cut));
  out += kMarker;
  return out;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + path);
}

}  // namespace util
}  // namespace aegis
