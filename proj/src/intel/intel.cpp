#include "aegis/intel/intel.hpp"

#include <algorithm>
#include <cctype>

#include "aegis/util.hpp"

namespace aegis::intel {

using nlohmann::json;

std::string technology_label(const TechnologySelection& t) {
  return t.version_pattern.empty() ? t.name : t.name + " " + t.version_pattern;
}

std::string cpe_match_string(const TechnologySelection& t) {
  std::string product;
  for (unsigned char c : util::trim(t.name)) {
    product.push_back(std::isspace(c) ? '_' : static_cast<char>(std::tolower(c)));
  }
  std::string version = t.version_pattern;
  if (version.size() >= 2 && version.compare(version.size() - 2, 2, ".*") == 0)
    version.resize(version.size() - 2);
  std::string cpe = "cpe:2.3:*:*:" + product;
  if (!version.empty()) cpe += ":" + version;
  return cpe;
}

std::vector<CveRecord> select_cves(std::vector<CveRecord> records, double cutoff, int cap) {
  std::erase_if(records, [cutoff](const CveRecord& r) {
    return util::iequals(r.status, "Rejected") || r.cvss_base < cutoff;
  });
  std::stable_sort(records.begin(), records.end(), [](const CveRecord& a, const CveRecord& b) {
    if (a.published != b.published) return a.published > b.published;
    return a.cve_id > b.cve_id;
  });
  if (cap >= 0 && records.size() > static_cast<std::size_t>(cap)) records.resize(cap);
  return records;
}

std::vector<OtxPulse> select_pulses(std::vector<OtxPulse> pulses, int cap) {
  std::stable_sort(pulses.begin(), pulses.end(), [](const OtxPulse& a, const OtxPulse& b) {
    if (a.modified != b.modified) return a.modified > b.modified;
    return a.pulse_id < b.pulse_id;
  });
  if (cap >= 0 && pulses.size() > static_cast<std::size_t>(cap)) pulses.resize(cap);
  return pulses;
}

NvdClient::NvdClient(net::HttpClient& http, IntelConfig config)
    : http_(http), config_(std::move(config)), limiter_(config_.nvd_min_interval) {}

std::vector<CveRecord> NvdClient::parse_page(const json& page) {
  std::vector<CveRecord> out;
  for (const auto& v : page.value("vulnerabilities", json::array())) {
    const json& cve = v.contains("cve") ? v["cve"] : v;
    CveRecord r;
    r.cve_id = cve.value("id", "");
    r.published = cve.value("published", "");
    r.status = cve.value("vulnStatus", "");
    for (const auto& d : cve.value("descriptions", json::array())) {
      if (d.value("lang", "") == "en") {
        r.description = d.value("value", "");
        break;
      }
    }
    const json metrics = cve.value("metrics", json::object());
    for (const char* key : {"cvssMetricV31", "cvssMetricV30"}) {
      auto it = metrics.find(key);
      if (it == metrics.end() || !it->is_array() || it->empty()) continue;
      // prefer the catalogue's own (Primary) score when several sources exist
      const json* chosen = &(*it)[0];
      for (const auto& m : *it)
        if (m.value("type", "") == "Primary") chosen = &m;
      const json data = chosen->value("cvssData", json::object());
      r.cvss_base = data.value("baseScore", 0.0);
      r.severity = data.value("baseSeverity", "");
      break;
    }
    if (!r.cve_id.empty()) out.push_back(std::move(r));
  }
  return out;
}

std::vector<CveRecord> NvdClient::fetch_for(const TechnologySelection& tech) {
  std::vector<CveRecord> all;
  int start = 0;
  for (int page = 0; page < config_.nvd_max_pages; ++page) {
    net::HttpRequest req;
    req.url = net::with_query(config_.nvd_base_url,
                              {{"virtualMatchString", cpe_match_string(tech)},
                               {"noRejected", ""},
                               {"resultsPerPage", std::to_string(config_.nvd_page_size)},
                               {"startIndex", std::to_string(start)}});
    if (!config_.nvd_api_key.empty()) req.headers.emplace_back("apiKey", config_.nvd_api_key);

    const json body = net::with_retry(config_.retry, [&] {
      limiter_.acquire();
      net::HttpResponse resp = http_.send(req);
      if (resp.status == 403 || resp.status == 429) {
        // NVD signals an exhausted rate window with 403
        throw Error(resp.status == 429 ? Errc::RateLimited : Errc::QuotaExceeded,
                    "NVD status " + std::to_string(resp.status));
      }
      if (auto code = net::classify_status(resp.status))
        throw Error(*code, "NVD status " + std::to_string(resp.status));
      try {
        return json::parse(resp.body);
      } catch (const json::parse_error& e) {
        throw Error(Errc::Transport, std::string("NVD returned invalid JSON: ") + e.what());
      }
    });

    auto records = parse_page(body);
    const int total = body.value("totalResults", 0);
    const int per_page = body.value("resultsPerPage", static_cast<int>(records.size()));
    all.insert(all.end(), records.begin(), records.end());
    start += std::max(per_page, 1);
    if (records.empty() || start >= total) break;
  }
  return select_cves(std::move(all), config_.cvss_cutoff, config_.cve_cap);
}

CveMap NvdClient::fetch_cves(std::span<const TechnologySelection> technologies) {
  CveMap out;
  for (const auto& t : technologies) out[technology_label(t)] = fetch_for(t);
  return out;
}

OtxClient::OtxClient(net::HttpClient& http, IntelConfig config)
    : http_(http), config_(std::move(config)) {}

std::vector<OtxPulse> OtxClient::parse_results(const json& page) {
  std::vector<OtxPulse> out;
  for (const auto& p : page.value("results", json::array())) {
    OtxPulse pulse;
    pulse.pulse_id = p.value("id", "");
    pulse.name = p.value("name", "");
    pulse.modified = p.value("modified", "");
    if (p.contains("description") && p["description"].is_string())
      pulse.description = p["description"].get<std::string>();
    for (const auto& t : p.value("tags", json::array()))
      if (t.is_string()) pulse.tags.push_back(t.get<std::string>());
    if (p.contains("adversary") && p["adversary"].is_string() &&
        !p["adversary"].get<std::string>().empty())
      pulse.adversary = p["adversary"].get<std::string>();
    for (const auto& m : p.value("malware_families", json::array())) {
      if (m.is_string()) pulse.malware_families.push_back(m.get<std::string>());
      else if (m.is_object())
        pulse.malware_families.push_back(m.value("display_name", m.value("id", "")));
    }
    out.push_back(std::move(pulse));
  }
  return out;
}

std::vector<OtxPulse> OtxClient::fetch_pulses(std::string_view industry_sector) {
  if (config_.otx_api_key.empty()) throw Error(Errc::AuthFailed, "no OTX API key configured");
  net::HttpRequest req;
  req.url = net::with_query(config_.otx_base_url + "/api/v1/search/pulses",
                            {{"q", std::string(industry_sector)},
                             {"sort", "-modified"},
                             {"limit", std::to_string(std::max(config_.pulse_cap, 1) * 4)},
                             {"page", "1"}});
  req.headers.emplace_back("X-OTX-API-KEY", config_.otx_api_key);

  const json body = net::with_retry(config_.retry, [&] {
    net::HttpResponse resp = http_.send(req);
    if (auto code = net::classify_status(resp.status))
      throw Error(*code, "OTX status " + std::to_string(resp.status));
    try {
      return json::parse(resp.body);
    } catch (const json::parse_error& e) {
      throw Error(Errc::Transport, std::string("OTX returned invalid JSON: ") + e.what());
    }
  });
  return select_pulses(parse_results(body), config_.pulse_cap);
}

namespace {

struct Item {
  std::string fixed;
  std::string description;
};

std::string layout(const std::vector<std::string>& headers_before,
                   const std::vector<std::vector<Item>>& groups, std::size_t budget) {
  // fixed cost: every header line, every item's fixed part and newline
  std::size_t fixed_cost = 0;
  std::size_t described = 0;
  std::vector<std::vector<Item>> kept = groups;
  auto recount = [&] {
    fixed_cost = 0;
    described = 0;
    for (std::size_t g = 0; g < kept.size(); ++g) {
      fixed_cost += headers_before[g].empty() ? 0 : headers_before[g].size() + 1;
      for (const auto& it : kept[g]) {
        fixed_cost += it.fixed.size() + 1;
        if (!it.description.empty()) ++described;
      }
    }
  };
  recount();
  while (fixed_cost > budget) {
    // drop the last item of the last non-empty group; drop empty groups
    auto g = kept.rbegin();
    while (g != kept.rend() && g->empty()) ++g;
    if (g == kept.rend()) break;
    g->pop_back();
    recount();
  }
  static constexpr std::size_t kSep = 3;  // " | "
  const std::size_t spare = budget > fixed_cost ? budget - fixed_cost : 0;
  const std::size_t share = described ? spare / described : 0;

  std::string out;
  for (std::size_t g = 0; g < kept.size(); ++g) {
    if (kept[g].empty() && !groups[g].empty()) continue;
    if (!headers_before[g].empty()) out += headers_before[g] + "\n";
    for (const auto& it : kept[g]) {
      out += it.fixed;
      if (!it.description.empty() && share > kSep + 3) {
        out += " | ";
        out += util::truncate_with_ellipsis(it.description, share - kSep);
      }
      out += "\n";
    }
  }
  if (out.size() > budget) out = util::truncate_with_ellipsis(out, budget);
  return out;
}

}  // namespace

ContextBlocks render_context(const CveMap& cves, std::span<const OtxPulse> pulses,
                             std::size_t budget_chars) {
  ContextBlocks blocks;

  std::vector<std::string> headers;
  std::vector<std::vector<Item>> groups;
  for (const auto& [label, records] : cves) {
    if (records.empty()) continue;
    headers.push_back(label + ":");
    std::vector<Item> items;
    for (const auto& r : records) {
      items.push_back({"- " + r.cve_id + " | CVSS " + util::fixed(r.cvss_base, 1) +
                           (r.severity.empty() ? "" : " " + r.severity) + " | published " +
                           r.published.substr(0, 10),
                       r.description});
    }
    groups.push_back(std::move(items));
  }
  if (!groups.empty()) blocks.nvd_block = layout(headers, groups, budget_chars);

  if (!pulses.empty()) {
    std::vector<Item> items;
    for (const auto& p : pulses) {
      std::string fixed = "- " + p.name + " | modified " + p.modified.substr(0, 10);
      if (!p.tags.empty()) fixed += " | tags: " + util::join(p.tags, ", ");
      if (p.adversary) fixed += " | adversary: " + *p.adversary;
      if (!p.malware_families.empty())
        fixed += " | malware: " + util::join(p.malware_families, ", ");
      items.push_back({std::move(fixed), p.description});
    }
    blocks.otx_block = layout({""}, {items}, budget_chars);
  }
  return blocks;
}

}  // namespace aegis::intel
