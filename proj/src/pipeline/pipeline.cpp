#include "aegis/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <regex>
#include <thread>

#include "aegis/app/persist.hpp"
#include "aegis/domain/json_io.hpp"
#include "aegis/domain/validate.hpp"
#include "aegis/llm/extract.hpp"
#include "aegis/llm/prompts.hpp"
#include "aegis/util.hpp"

namespace aegis::pipeline {

using llm::PromptKind;
using llm::Shape;
using nlohmann::json;

namespace {

constexpr std::string_view kCorrectiveNote = "Respond with only the specified structure.";
constexpr std::size_t kTechniqueDescriptionChars = 600;

std::string or_none(const std::string& block) { return block.empty() ? "None" : block; }

// Asks once, then re-asks once with a corrective system note if `parse`
// throws. Gateway failures become GenerationFailed; the second parse
// failure propagates unchanged.
template <typename Parse>
auto ask(const RunContext& ctx, RunLog& log, PromptKind kind, std::string prompt, Parse&& parse)
    -> decltype(parse(std::string{})) {
  const std::string slug(llm::kind_slug(kind));
  llm::CompletionRequest req;
  req.messages.push_back({"user", std::move(prompt)});
  req.temperature = ctx.config.sampling_temperature;
  req.max_output_tokens = ctx.config.max_output_tokens;
  req.kind = kind;
  req.max_retries = ctx.config.retries_per_stage;

  for (int attempt = 0;; ++attempt) {
    llm::Completion c;
    try {
      c = ctx.gateway->complete(req);
    } catch (const Error& e) {
      throw Error(Errc::GenerationFailed, slug + ": " + e.what());
    }
    log.retries += static_cast<int>(c.retries.size());
    try {
      return parse(c.text);
    } catch (const Error& e) {
      if (attempt >= 1) throw;
      ++log.retries;
      log.warn(slug + ": corrective re-ask after " + std::string(errc_name(e.code())));
      req.messages.push_back({"assistant", c.text});
      req.messages.push_back({"system", std::string(kCorrectiveNote)});
    }
  }
}

[[noreturn]] void rethrow_as_generation_failed(std::string_view slug, const Error& e) {
  if (e.code() == Errc::GenerationFailed) throw e;
  throw Error(Errc::GenerationFailed, std::string(slug) + ": " + e.what());
}

MitreMapping sentinel_mapping(std::size_t candidates) {
  MitreMapping m;
  m.candidate_count = candidates;
  return m;
}

llm::Bindings downstream_bindings(const RunContext& ctx, const std::vector<ThreatScenario>& threats,
                                  const std::vector<MitreMapping>& mappings) {
  llm::Bindings b = llm::profile_bindings(ctx.profile);
  b["threats"] = threats_prompt_text(threats);
  b["mitre_mapping"] = mappings_prompt_text(threats, mappings);
  b["nvd_vulnerabilities"] = or_none(ctx.cve_context);
  return b;
}

std::vector<std::string> split_cells(std::string_view row) {
  std::string_view r = row;
  while (!r.empty() && (r.front() == ' ' || r.front() == '\t')) r.remove_prefix(1);
  while (!r.empty() && (r.back() == ' ' || r.back() == '\t' || r.back() == '\r')) r.remove_suffix(1);
  if (!r.empty() && r.front() == '|') r.remove_prefix(1);
  if (!r.empty() && r.back() == '|' && (r.size() < 2 || r[r.size() - 2] != '\\')) r.remove_suffix(1);
  std::vector<std::string> cells;
  std::string cur;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == '\\' && i + 1 < r.size() && r[i + 1] == '|') {
      cur.push_back('|');
      ++i;
    } else if (r[i] == '|') {
      cells.push_back(util::trim(cur));
      cur.clear();
    } else {
      cur.push_back(r[i]);
    }
  }
  cells.push_back(util::trim(cur));
  return cells;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  static const std::regex re(R"(:?-+:?)");
  return std::all_of(cells.begin(), cells.end(),
                     [](const std::string& c) { return std::regex_match(c, re); });
}

std::string clean_title(std::string line) {
  line = util::trim(line);
  while (!line.empty() && (line.front() == '#' || line.front() == '*' || line.front() == '-' ||
                           line.front() == '>' || line.front() == ' '))
    line.erase(0, 1);
  while (!line.empty() && (line.back() == '*' || line.back() == ':' || line.back() == ' '))
    line.pop_back();
  for (std::string_view prefix : {"Test Case", "Title"}) {
    if (util::starts_with_icase(line, prefix)) {
      std::string rest = util::trim(std::string_view(line).substr(prefix.size()));
      // "Test Case 3: X" and "Title: X" drop the label; a bare "Test Case 3" stays.
      const auto colon = rest.find(':');
      if (colon != std::string::npos) {
        line = util::trim(std::string_view(rest).substr(colon + 1));
        while (!line.empty() && (line.front() == '*' || line.front() == ' ')) line.erase(0, 1);
      }
      break;
    }
  }
  return util::trim(line);
}

std::string title_from_body(const std::string& body) {
  for (const auto& line : util::split_lines(body)) {
    const std::string t = util::trim(line);
    for (std::string_view kw : {"Scenario:", "Feature:", "Scenario Outline:"}) {
      if (util::starts_with_icase(t, kw)) return util::trim(std::string_view(t).substr(kw.size()));
    }
  }
  return {};
}

}  // namespace

RunContext prepare_context(const ApplicationProfile& profile, const PipelineConfig& config,
                           const Handles& handles, RunLog& log) {
  config.validate();
  if (!handles.gateway || !handles.gateway->provider().configured())
    throw Error(Errc::Precondition, "no LLM provider key configured");
  if (!handles.kb) throw Error(Errc::Precondition, "ATT&CK knowledge base not loaded");
  if (auto errors = validate_profile(profile); !errors.empty())
    throw Error(errors.front().kind, errors.front().field + ": " + errors.front().message);

  intel::CveMap cves;
  if (handles.nvd && !profile.technologies.empty()) {
    try {
      cves = handles.nvd->fetch_cves(profile.technologies);
    } catch (const Error& e) {
      log.warn("nvd unavailable: " + e.detail());
    }
  }
  std::vector<intel::OtxPulse> pulses;
  if (handles.otx) {
    try {
      pulses = handles.otx->fetch_pulses(profile.industry_sector);
    } catch (const Error& e) {
      log.warn("otx unavailable: " + e.detail());
    }
  }
  const auto blocks =
      intel::render_context(cves, pulses, static_cast<std::size_t>(config.context_char_budget));

  RunContext ctx;
  ctx.profile = profile;
  ctx.cve_context = blocks.nvd_block;
  ctx.otx_context = blocks.otx_block;
  ctx.kb = handles.kb.get();
  ctx.gateway = handles.gateway.get();
  ctx.config = config;
  ctx.dataset_rules = handles.dataset_rules;
  return ctx;
}

ThreatSet generate_threats(const RunContext& ctx, RunLog& log) {
  llm::Bindings b = llm::profile_bindings(ctx.profile);
  b["nvd_vulnerabilities"] = or_none(ctx.cve_context);
  b["otx_data"] = or_none(ctx.otx_context);
  const Shape shape = Shape::object({{"threat_model", Shape::array_of(Shape::object())},
                                     {"improvement_suggestions", Shape::array_of(Shape::string())}});
  try {
    ThreatDocument doc = ask(ctx, log, PromptKind::ThreatModel,
                             llm::render_prompt(PromptKind::ThreatModel, b),
                             [&](const std::string& text) {
                               return validate_threat_model_doc(llm::extract_structured(text, shape),
                                                                ctx.config.threats_per_category);
                             });
    for (auto& w : doc.warnings) log.warn("threat_model: " + w);
    return ThreatSet{std::move(doc.threats), std::move(doc.improvement_suggestions)};
  } catch (const Error& e) {
    rethrow_as_generation_failed("threat_model", e);
  }
}

MitreMapping map_threat(const RunContext& ctx, const ThreatScenario& threat, RunLog& log) {
  const auto datasets = ctx.dataset_rules.select(ctx.profile.app_type);
  const auto candidates = ctx.kb->keyword_search(datasets, threat.keywords,
                                                 static_cast<std::size_t>(ctx.config.candidate_cap));
  if (candidates.empty()) return sentinel_mapping(0);

  json techniques = json::array();
  for (const auto& c : candidates) {
    techniques.push_back({{"id", c.stix_id},
                          {"technique_id", c.technique_id},
                          {"name", c.name},
                          {"description", util::truncate_with_ellipsis(c.description, kTechniqueDescriptionChars)}});
  }
  llm::Bindings b = llm::profile_bindings(ctx.profile);
  b["threat"] = json(threat).dump(2);
  b["technique_descriptions"] = techniques.dump(2);

  const Shape shape = Shape::array_of(Shape::string(), 1);
  std::string chosen;
  try {
    chosen = ask(ctx, log, PromptKind::MitreSelect, llm::render_prompt(PromptKind::MitreSelect, b),
                 [&](const std::string& text) {
                   return util::trim(llm::extract_structured(text, shape)[0].get<std::string>());
                 });
  } catch (const Error& e) {
    rethrow_as_generation_failed("mitre_select", e);
  }

  if (chosen == kSentinelPatternId) return sentinel_mapping(candidates.size());
  auto hit = std::find_if(candidates.begin(), candidates.end(),
                          [&](const kb::AttackPattern& p) { return p.stix_id == chosen; });
  if (hit == candidates.end()) {
    MitreMapping m = sentinel_mapping(candidates.size());
    m.hallucinated = true;
    m.proposed_id = chosen;
    log.warn("mitre_select: id outside candidates replaced by sentinel: " + chosen);
    return m;
  }
  MitreMapping m;
  m.stix_id = hit->stix_id;
  m.technique_id = hit->technique_id;
  m.name = hit->name;
  m.url = hit->url.empty() ? "https://attack.mitre.org/techniques/" + hit->technique_id + "/" : hit->url;
  m.mapped = is_mapped(m.stix_id, m.technique_id);
  m.candidate_count = candidates.size();
  return m;
}

std::vector<std::optional<DreadScore>> assess_dread(const RunContext& ctx,
                                                    const std::vector<ThreatScenario>& threats,
                                                    const std::vector<MitreMapping>& mappings,
                                                    RunLog& log) {
  if (threats.empty()) throw Error(Errc::Precondition, "DREAD needs at least one threat");
  struct Entry {
    std::string type;
    std::string scenario;
    DreadScore score;
  };
  const Shape entry_shape = Shape::object({{"Threat Type", Shape::string()},
                                           {"Scenario", Shape::string()},
                                           {"Damage Potential", Shape::integer()},
                                           {"Reproducibility", Shape::integer()},
                                           {"Exploitability", Shape::integer()},
                                           {"Affected Users", Shape::integer()},
                                           {"Discoverability", Shape::integer()}});
  const Shape shape = Shape::object({{"Risk Assessment", Shape::array_of(entry_shape)}});

  std::vector<Entry> entries;
  try {
    entries = ask(ctx, log, PromptKind::Dread,
                  llm::render_prompt(PromptKind::Dread, downstream_bindings(ctx, threats, mappings)),
                  [&](const std::string& text) {
                    std::vector<Entry> out;
                    const json doc = llm::extract_structured(text, shape);
                    for (const auto& e : doc["Risk Assessment"]) {
                      out.push_back({e["Threat Type"].get<std::string>(), e["Scenario"].get<std::string>(),
                                     DreadScore(e["Damage Potential"].get<int>(),
                                                e["Reproducibility"].get<int>(),
                                                e["Exploitability"].get<int>(),
                                                e["Affected Users"].get<int>(),
                                                e["Discoverability"].get<int>())});
                    }
                    return out;
                  });
  } catch (const Error& e) {
    if (e.code() == Errc::OutOfRange) throw;
    rethrow_as_generation_failed("dread", e);
  }

  std::vector<std::optional<DreadScore>> scores(threats.size());
  std::vector<bool> used(entries.size(), false);
  for (std::size_t i = 0; i < threats.size(); ++i) {
    const std::string scenario = util::trim(threats[i].scenario);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (used[k]) continue;
      if (parse_stride(entries[k].type) == threats[i].threat_type &&
          util::trim(entries[k].scenario) == scenario) {
        scores[i] = entries[k].score;
        used[k] = true;
        break;
      }
    }
  }
  std::size_t next = 0;
  for (std::size_t i = 0; i < threats.size(); ++i) {
    if (scores[i]) continue;
    while (next < entries.size() && used[next]) ++next;
    if (next == entries.size()) {
      log.warn("dread: no entry for threat " + std::to_string(i + 1));
      continue;
    }
    scores[i] = entries[next].score;
    used[next] = true;
    log.warn("dread: threat " + std::to_string(i + 1) + " paired positionally");
  }
  const auto extra = std::count(used.begin(), used.end(), false);
  if (extra) log.warn("dread: " + std::to_string(extra) + " unpaired entries ignored");
  return scores;
}

std::vector<MitigationEntry> parse_mitigation_table(std::string_view markdown,
                                                    std::vector<std::string>* warnings) {
  static const std::regex br(R"(<\s*br\s*/?\s*>)", std::regex::icase);
  std::vector<MitigationEntry> out;
  const auto lines = util::split_lines(markdown);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = util::trim(lines[i]);
    if (line.empty() || line.front() != '|') continue;
    const auto cells = split_cells(line);
    if (is_separator_row(cells)) continue;
    // a header is the row directly above a separator row
    if (i + 1 < lines.size()) {
      const std::string nxt = util::trim(lines[i + 1]);
      if (!nxt.empty() && nxt.front() == '|' && is_separator_row(split_cells(nxt))) continue;
    }
    if (cells.size() < 3) {
      if (warnings) warnings->push_back("mitigations: row " + std::to_string(i + 1) + " has fewer than 3 cells");
      continue;
    }
    std::vector<std::string> rest(cells.begin() + 2, cells.end());
    MitigationEntry e{cells[0], cells[1], util::join(rest, " | ")};
    if (warnings && std::regex_search(line, br))
      warnings->push_back("mitigations: HTML line break in table row " + std::to_string(i + 1));
    out.push_back(std::move(e));
  }
  return out;
}

MitigationSet generate_mitigations(const RunContext& ctx, const std::vector<ThreatScenario>& threats,
                                   const std::vector<MitreMapping>& mappings, RunLog& log) {
  try {
    return ask(ctx, log, PromptKind::Mitigations,
               llm::render_prompt(PromptKind::Mitigations, downstream_bindings(ctx, threats, mappings)),
               [&](const std::string& text) {
                 if (util::trim(text).empty()) throw Error(Errc::GenerationFailed, "mitigations: empty response");
                 std::vector<std::string> warnings;
                 MitigationSet set;
                 set.raw_markdown = text;
                 set.entries = parse_mitigation_table(text, &warnings);
                 if (set.entries.empty()) warnings.push_back("mitigations: no table rows parsed");
                 for (auto& w : warnings) log.warn(std::move(w));
                 return set;
               });
  } catch (const Error& e) {
    rethrow_as_generation_failed("mitigations", e);
  }
}

std::vector<GherkinSuite> parse_gherkin_suites(std::string_view text) {
  std::vector<GherkinSuite> out;
  std::size_t prev_end = 0;
  for (const auto& f : llm::find_fences(text)) {
    const std::string body = f.body;
    std::string title;
    const auto before = util::split_lines(text.substr(prev_end, f.begin - prev_end));
    for (auto it = before.rbegin(); it != before.rend(); ++it) {
      if (!util::trim(*it).empty()) {
        title = clean_title(*it);
        break;
      }
    }
    prev_end = f.end;
    if (util::trim(body).empty()) continue;
    if (title.empty()) title = title_from_body(body);
    if (title.empty()) title = "Test Case " + std::to_string(out.size() + 1);
    out.push_back({std::move(title), body});
  }
  return out;
}

GherkinSuiteList generate_test_cases(const RunContext& ctx,
                                     const std::vector<ThreatScenario>& threats, RunLog& log) {
  llm::Bindings b;
  b["threats"] = threats_prompt_text(threats);
  try {
    return ask(ctx, log, PromptKind::TestCases, llm::render_prompt(PromptKind::TestCases, b),
               [](const std::string& text) {
                 GherkinSuiteList list{parse_gherkin_suites(text)};
                 if (list.suites.empty())
                   throw Error(Errc::GenerationFailed, "test_cases: no fenced Gherkin blocks");
                 return list;
               });
  } catch (const Error& e) {
    rethrow_as_generation_failed("test_cases", e);
  }
}

std::string parse_mermaid(std::string_view text) {
  const auto fences = llm::find_fences(text);
  std::string source;
  auto mermaid = std::find_if(fences.begin(), fences.end(),
                              [](const llm::Fence& f) { return f.lang == "mermaid"; });
  if (mermaid != fences.end()) source = mermaid->body;
  else if (!fences.empty()) source = fences.front().body;
  else source = util::trim(text);

  static const std::regex header(R"((graph|flowchart)(\s.*)?)");
  for (const auto& line : util::split_lines(source)) {
    const std::string t = util::trim(line);
    if (t.empty() || t.rfind("%%", 0) == 0) continue;
    if (std::regex_match(t, header)) return source;
    break;
  }
  throw Error(Errc::NotMermaid, "response does not start with a graph declaration");
}

AttackTree generate_attack_tree(const RunContext& ctx, const std::vector<ThreatScenario>& threats,
                                const std::vector<MitreMapping>& mappings, RunLog& log) {
  try {
    return ask(ctx, log, PromptKind::AttackTree,
               llm::render_prompt(PromptKind::AttackTree, downstream_bindings(ctx, threats, mappings)),
               [](const std::string& text) { return AttackTree{parse_mermaid(text)}; });
  } catch (const Error& e) {
    if (e.code() == Errc::NotMermaid) throw;
    rethrow_as_generation_failed("attack_tree", e);
  }
}

ThreatModelRun run_threat_model(const RunContext& ctx, RunLog& log) {
  ThreatModelRun run;
  run.profile = ctx.profile;
  ThreatSet set = generate_threats(ctx, log);
  run.threats = std::move(set.threats);
  run.improvement_suggestions = std::move(set.improvement_suggestions);
  run.mappings.reserve(run.threats.size());
  for (const auto& t : run.threats) run.mappings.push_back(map_threat(ctx, t, log));
  return run;
}

void finish_metadata(ThreatModelRun& run, const RunContext& ctx, const Handles& handles,
                     const RunLog& log, int run_index) {
  run.metadata.timestamp = handles.clock ? handles.clock() : util::utc_timestamp();
  run.metadata.model_id = ctx.gateway->model_id();
  run.metadata.run_index = run_index;
  run.metadata.temperature = ctx.config.sampling_temperature;
  run.metadata.retries = log.retries;
  run.metadata.warnings = log.warnings;
}

ThreatModelRun run_full(const ApplicationProfile& profile, const PipelineConfig& config,
                        const Handles& handles, int run_index) {
  RunLog log;
  const RunContext ctx = prepare_context(profile, config, handles, log);
  ThreatModelRun run = run_threat_model(ctx, log);
  run.dread = assess_dread(ctx, run.threats, run.mappings, log);
  run.mitigations = generate_mitigations(ctx, run.threats, run.mappings, log);
  run.test_cases = generate_test_cases(ctx, run.threats, log);
  run.attack_tree = generate_attack_tree(ctx, run.threats, run.mappings, log);
  finish_metadata(run, ctx, handles, log, run_index);
  return run;
}

json manifest_json(const BatchManifest& m) {
  json failures = json::array();
  for (const auto& f : m.failures) failures.push_back({{"run_index", f.run_index}, {"error", f.error}});
  return json{{"case_id", m.case_id},
              {"requested", m.requested},
              {"successes", m.succeeded.size()},
              {"failures", m.failures.size()},
              {"succeeded", m.succeeded},
              {"failed", failures},
              {"total_threats", m.total_threats},
              {"files", m.files}};
}

BatchManifest manifest_from_json(const json& j) {
  BatchManifest m;
  m.case_id = j.at("case_id").get<std::string>();
  m.requested = j.at("requested").get<int>();
  m.succeeded = j.at("succeeded").get<std::vector<int>>();
  for (const auto& f : j.at("failed"))
    m.failures.push_back({f.at("run_index").get<int>(), f.at("error").get<std::string>()});
  m.total_threats = j.at("total_threats").get<std::size_t>();
  m.files = j.at("files").get<std::vector<std::string>>();
  return m;
}

BatchManifest run_batch(const ApplicationProfile& profile, int n,
                        const std::filesystem::path& out_dir, const PipelineConfig& config,
                        const Handles& handles, const BatchOptions& options) {
  if (n < 1) throw Error(Errc::BadInput, "batch size must be at least 1");
  const auto case_dir = out_dir / ("case-" + options.case_id);
  std::error_code ec;
  std::filesystem::create_directories(case_dir, ec);
  if (ec) throw Error(Errc::IoError, case_dir.string() + ": " + ec.message());

  struct Outcome {
    bool done = false;
    std::size_t threats = 0;
    std::string error;
    std::exception_ptr exception;
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(n));
  std::atomic<int> next{1};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (int k = next++; k <= n && !stop; k = next++) {
      Outcome& o = outcomes[static_cast<std::size_t>(k - 1)];
      try {
        ThreatModelRun run = run_full(profile, config, handles, k);
        app::persist_run(run, case_dir / ("batch-" + std::to_string(k) + ".json"));
        o.threats = run.threats.size();
      } catch (const std::exception& e) {
        o.error = e.what();
        o.exception = std::current_exception();
        if (!options.continue_on_error) stop = true;
      }
      o.done = true;
    }
  };
  const int workers = std::clamp(options.parallelism, 1, n);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BatchManifest m;
  m.case_id = options.case_id;
  m.requested = n;
  std::exception_ptr first;
  for (int k = 1; k <= n; ++k) {
    const Outcome& o = outcomes[static_cast<std::size_t>(k - 1)];
    if (!o.done) continue;
    if (o.exception) {
      m.failures.push_back({k, o.error});
      if (!first) first = o.exception;
    } else {
      m.succeeded.push_back(k);
      m.total_threats += o.threats;
      m.files.push_back("batch-" + std::to_string(k) + ".json");
    }
  }
  util::write_file((case_dir / "manifest.json").string(), manifest_json(m).dump(2));
  if (first && !options.continue_on_error) std::rethrow_exception(first);
  return m;
}

}  // namespace aegis::pipeline
