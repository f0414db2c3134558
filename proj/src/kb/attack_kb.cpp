#include "aegis/kb/attack_kb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

#include "aegis/domain/types.hpp"
#include "aegis/error.hpp"
#include "aegis/util.hpp"

namespace aegis::kb {

using nlohmann::json;

std::string_view to_string(Dataset d) noexcept {
  switch (d) {
    case Dataset::Enterprise: return "Enterprise";
    case Dataset::Mobile: return "Mobile";
    case Dataset::ICS: return "ICS";
  }
  return "Enterprise";
}

std::optional<Dataset> parse_dataset(std::string_view s) {
  std::string t = util::to_lower(util::trim(s));
  if (t == "enterprise" || t == "enterprise-attack") return Dataset::Enterprise;
  if (t == "mobile" || t == "mobile-attack") return Dataset::Mobile;
  if (t == "ics" || t == "ics-attack") return Dataset::ICS;
  return std::nullopt;
}

AttackPattern unknown_pattern() {
  return AttackPattern{std::string(kSentinelPatternId), std::string(kUnmappedTechniqueId),
                       "Unknown", "", "https://attack.mitre.org/techniques/N/A/",
                       Dataset::Enterprise};
}

bool is_well_formed_pattern_id(std::string_view stix_id) {
  static const std::regex re(
      R"(attack-pattern--[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12})");
  return std::regex_match(stix_id.begin(), stix_id.end(), re);
}

namespace {

std::optional<Dataset> dataset_from_filename(const std::filesystem::path& p) {
  const std::string name = util::to_lower(p.filename().string());
  if (name.find("mobile") != std::string::npos) return Dataset::Mobile;
  if (name.find("ics") != std::string::npos) return Dataset::ICS;
  if (name.find("enterprise") != std::string::npos) return Dataset::Enterprise;
  return std::nullopt;
}

bool flag(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && it->is_boolean() && it->get<bool>();
}

}  // namespace

KnowledgeBase KnowledgeBase::load_bundles(std::span<const std::filesystem::path> paths) {
  KnowledgeBase kb;
  for (const auto& path : paths) {
    if (!std::filesystem::exists(path)) throw Error(Errc::FileMissing, path.string());
    std::ifstream in(path);
    if (!in) throw Error(Errc::FileMissing, path.string());
    json bundle;
    try {
      in >> bundle;
    } catch (const json::parse_error& e) {
      throw Error(Errc::MalformedBundle, path.string() + ": " + e.what());
    }
    try {
      kb.add_bundle(bundle, dataset_from_filename(path).value_or(Dataset::Enterprise));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.detail());
    }
  }
  return kb;
}

void KnowledgeBase::add_bundle(const json& bundle, Dataset fallback) {
  if (!bundle.is_object() || !bundle.contains("objects") || !bundle["objects"].is_array())
    throw Error(Errc::MalformedBundle, "bundle has no 'objects' array");

  const json& objects = bundle["objects"];
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const json& obj = objects[i];
    const std::string where = "object " + std::to_string(i);
    if (!obj.is_object()) throw Error(Errc::MalformedBundle, where + " is not an object");
    if (obj.value("type", "") != "attack-pattern") continue;
    if (flag(obj, "revoked") || flag(obj, "x_mitre_deprecated")) continue;

    if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("name") ||
        !obj["name"].is_string())
      throw Error(Errc::MalformedBundle, where + " lacks id or name");

    AttackPattern p;
    p.stix_id = obj["id"].get<std::string>();
    p.name = obj["name"].get<std::string>();
    if (auto d = obj.find("description"); d != obj.end() && d->is_string())
      p.description = d->get<std::string>();

    if (auto refs = obj.find("external_references"); refs != obj.end() && refs->is_array()) {
      for (const auto& ref : *refs) {
        const std::string source = ref.value("source_name", "");
        if (source.rfind("mitre-", 0) == 0 && source.size() >= 6 &&
            source.compare(source.size() - 6, 6, "attack") == 0 && ref.contains("external_id")) {
          p.technique_id = ref.value("external_id", "");
          p.url = ref.value("url", "");
          break;
        }
      }
    }
    if (p.technique_id.empty())
      throw Error(Errc::MalformedBundle, where + " (" + p.stix_id + ") has no ATT&CK external reference");

    std::vector<Dataset> domains;
    if (auto dom = obj.find("x_mitre_domains"); dom != obj.end() && dom->is_array()) {
      for (const auto& d : *dom) {
        if (auto parsed = d.is_string() ? parse_dataset(d.get<std::string>()) : std::nullopt)
          domains.push_back(*parsed);
      }
    }
    if (domains.empty()) domains.push_back(fallback);
    p.dataset = domains.front();

    std::size_t index;
    if (auto it = by_id_.find(p.stix_id); it != by_id_.end()) {
      index = it->second;
    } else {
      index = patterns_.size();
      std::string haystack = util::to_lower(p.name) + "\n" + util::to_lower(p.description);
      by_id_.emplace(p.stix_id, index);
      patterns_.push_back(Entry{std::move(p), std::move(haystack)});
    }
    for (Dataset d : domains) {
      auto& list = members_[d];
      if (std::find(list.begin(), list.end(), index) == list.end()) list.push_back(index);
    }
  }
}

std::vector<AttackPattern> KnowledgeBase::keyword_search(const std::set<Dataset>& datasets,
                                                         std::span<const std::string> keywords,
                                                         std::size_t cap) const {
  std::vector<std::string> needles;
  for (const auto& k : keywords) {
    std::string n = util::to_lower(util::trim(k));
    if (!n.empty() && std::find(needles.begin(), needles.end(), n) == needles.end())
      needles.push_back(std::move(n));
  }
  if (needles.empty() || cap == 0) return {};

  std::vector<std::size_t> pool;
  for (Dataset d : datasets) {
    if (auto it = members_.find(d); it != members_.end())
      pool.insert(pool.end(), it->second.begin(), it->second.end());
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  struct Hit {
    std::size_t index;
    std::size_t distinct;
    std::size_t total;
  };
  std::vector<Hit> hits;
  for (std::size_t idx : pool) {
    const std::string& hay = patterns_[idx].haystack;
    Hit h{idx, 0, 0};
    for (const auto& n : needles) {
      const std::size_t c = util::count_occurrences(hay, n);
      if (c) {
        ++h.distinct;
        h.total += c;
      }
    }
    if (h.distinct) hits.push_back(h);
  }

  std::sort(hits.begin(), hits.end(), [this](const Hit& a, const Hit& b) {
    if (a.distinct != b.distinct) return a.distinct > b.distinct;
    if (a.total != b.total) return a.total > b.total;
    const auto& pa = patterns_[a.index].pattern;
    const auto& pb = patterns_[b.index].pattern;
    if (pa.technique_id != pb.technique_id) return pa.technique_id < pb.technique_id;
    return pa.stix_id < pb.stix_id;
  });

  std::vector<AttackPattern> out;
  std::set<std::string> seen;
  for (const auto& h : hits) {
    const auto& p = patterns_[h.index].pattern;
    if (!seen.insert(p.technique_id).second) continue;
    out.push_back(p);
    if (out.size() == cap) break;
  }
  return out;
}

AttackPattern KnowledgeBase::resolve(std::string_view stix_id) const {
  if (stix_id == kSentinelPatternId) return unknown_pattern();
  if (!is_well_formed_pattern_id(stix_id))
    throw Error(Errc::InvalidId, "'" + std::string(stix_id) + "' is not an attack-pattern id");
  auto it = by_id_.find(std::string(stix_id));
  if (it == by_id_.end()) throw Error(Errc::NotFound, std::string(stix_id));
  return patterns_[it->second].pattern;
}

bool KnowledgeBase::contains(std::string_view stix_id) const {
  return by_id_.count(std::string(stix_id)) != 0;
}

std::size_t KnowledgeBase::dataset_size(Dataset d) const {
  auto it = members_.find(d);
  return it == members_.end() ? 0 : it->second.size();
}

DatasetRules DatasetRules::defaults() {
  DatasetRules r;
  r.rules_ = {
      {{"iot", "iiot"}, {Dataset::ICS, Dataset::Enterprise}},
      {{"ics", "scada", "plc", "ot", "industrial"}, {Dataset::ICS}},
      {{"mobile", "android", "ios", "smartphone"}, {Dataset::Mobile}},
  };
  return r;
}

DatasetRules DatasetRules::from_json(const json& j) {
  if (!j.is_array()) throw Error(Errc::SchemaViolation, "dataset rules must be an array");
  DatasetRules r;
  for (const auto& item : j) {
    Rule rule;
    for (const auto& t : item.at("match")) rule.tokens.push_back(util::to_lower(t.get<std::string>()));
    for (const auto& d : item.at("datasets")) {
      auto ds = parse_dataset(d.get<std::string>());
      if (!ds) throw Error(Errc::InvalidEnum, "unknown dataset " + d.get<std::string>());
      rule.datasets.insert(*ds);
    }
    if (rule.datasets.empty()) throw Error(Errc::SchemaViolation, "rule with no datasets");
    r.rules_.push_back(std::move(rule));
  }
  return r;
}

DatasetRules DatasetRules::from_file(const std::filesystem::path& path) {
  return from_json(json::parse(util::read_file(path.string())));
}

std::set<Dataset> DatasetRules::select(std::string_view app_type) const {
  std::set<std::string> tokens;
  std::string cur;
  for (unsigned char c : app_type) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.insert(cur);

  for (const auto& rule : rules_) {
    for (const auto& t : rule.tokens) {
      if (tokens.count(t)) return rule.datasets;
    }
  }
  return {Dataset::Enterprise};
}

std::set<Dataset> select_datasets(std::string_view app_type, const DatasetRules& rules) {
  return rules.select(app_type);
}

}  // namespace aegis::kb
