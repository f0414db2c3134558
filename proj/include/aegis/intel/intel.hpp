#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/net/http.hpp"

namespace aegis::intel {

struct CveRecord {
  std::string cve_id;
  double cvss_base = 0.0;
  std::string severity;
  std::string published;  // ISO-8601 as returned by the catalogue
  std::string status;
  std::string description;

  bool operator==(const CveRecord&) const = default;
};

struct OtxPulse {
  std::string pulse_id;
  std::string name;
  std::string modified;
  std::string description;
  std::vector<std::string> tags;
  std::optional<std::string> adversary;
  std::vector<std::string> malware_families;

  bool operator==(const OtxPulse&) const = default;
};

/// Keyed by technology label ("MySQL 5.8.*"), iterated in label order.
using CveMap = std::map<std::string, std::vector<CveRecord>>;

struct IntelConfig {
  int cve_cap = 10;
  int pulse_cap = 5;
  double cvss_cutoff = 7.0;
  int nvd_max_pages = 5;
  int nvd_page_size = 2000;
  std::string nvd_base_url = "https://services.nvd.nist.gov/rest/json/cves/2.0";
  std::string otx_base_url = "https://otx.alienvault.com";
  std::string nvd_api_key;  // optional, env AEGIS_NVD_API_KEY
  std::string otx_api_key;  // required for OTX, env AEGIS_OTX_API_KEY
  net::RetryPolicy retry;
  std::chrono::milliseconds nvd_min_interval{0};
};

std::string technology_label(const TechnologySelection& t);

/// CPE 2.3 match string for a technology: product normalised to lowercase
/// with underscores, "5.8.*" reduced to the version prefix "5.8".
std::string cpe_match_string(const TechnologySelection& t);

/// Client for the NVD CVE API 2.0. Shareable; requests to the host are
/// spaced by the configured interval.
class NvdClient {
 public:
  NvdClient(net::HttpClient& http, IntelConfig config);

  /// Rejected and sub-cutoff records dropped, newest first, at most cve_cap.
  /// Throws Error(Transport | RateLimited | QuotaExceeded).
  std::vector<CveRecord> fetch_for(const TechnologySelection& tech);
  CveMap fetch_cves(std::span<const TechnologySelection> technologies);

  /// Parses one API page (exposed for tests).
  static std::vector<CveRecord> parse_page(const nlohmann::json& page);

 private:
  net::HttpClient& http_;
  IntelConfig config_;
  net::RateLimiter limiter_;
};

/// Client for the OTX pulse search endpoint.
class OtxClient {
 public:
  OtxClient(net::HttpClient& http, IntelConfig config);

  /// Sector-keyword pulse search, newest first, at most pulse_cap.
  /// Throws Error(AuthFailed | Transport).
  std::vector<OtxPulse> fetch_pulses(std::string_view industry_sector);

  static std::vector<OtxPulse> parse_results(const nlohmann::json& page);

 private:
  net::HttpClient& http_;
  IntelConfig config_;
};

/// Pure filtering/ordering step shared by the NVD client.
std::vector<CveRecord> select_cves(std::vector<CveRecord> records, double cutoff, int cap);
std::vector<OtxPulse> select_pulses(std::vector<OtxPulse> pulses, int cap);

struct ContextBlocks {
  std::string nvd_block;
  std::string otx_block;
};

/// Renders the two prompt-context blocks. Each block is at most
/// `budget_chars` long; descriptions are shortened (with "...") first, and
/// trailing entries are dropped only when their fixed fields alone overflow.
ContextBlocks render_context(const CveMap& cves, std::span<const OtxPulse> pulses,
                             std::size_t budget_chars);

}  // namespace aegis::intel
