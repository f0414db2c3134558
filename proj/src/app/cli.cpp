#include "aegis/app/cli.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include "CLI11.hpp"
#include "aegis/app/persist.hpp"
#include "aegis/app/server.hpp"
#include "aegis/domain/validate.hpp"
#include "aegis/error.hpp"
#include "aegis/eval/embedding.hpp"
#include "aegis/eval/io.hpp"
#include "aegis/eval/readability.hpp"
#include "aegis/eval/similarity.hpp"
#include "aegis/eval/stats.hpp"
#include "aegis/pipeline/pipeline.hpp"
#include "aegis/report/report.hpp"
#include "aegis/util.hpp"

namespace aegis::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCtiBase = "https://raw.githubusercontent.com/mitre/cti/master/";

// Bundle file per dataset, in load order.
const std::vector<std::pair<kb::Dataset, std::string>>& bundle_files() {
  static const std::vector<std::pair<kb::Dataset, std::string>> files = {
      {kb::Dataset::Enterprise, "enterprise-attack"},
      {kb::Dataset::Mobile, "mobile-attack"},
      {kb::Dataset::ICS, "ics-attack"},
  };
  return files;
}

std::string getenv_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::IoError, "sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string format_opt(const std::optional<double>& v, int decimals) {
  return v ? util::fixed(*v, decimals) : "n/a";
}

ApplicationProfile load_profile(const std::string& path) {
  const json doc = json::parse(util::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::BadInput, path + " is not valid JSON");
  ProfileResult r = validate_profile(doc);
  if (!r.ok()) {
    std::vector<std::string> parts;
    for (const auto& e : r.errors) parts.push_back(e.field + ": " + e.message);
    throw Error(r.errors.front().kind, util::join(parts, "; "));
  }
  return *r.profile;
}

// Options shared by run, batch and serve.
struct ProviderOpts {
  std::string mock_dir;
  std::string kb_dir;
  bool no_intel = false;
};

void add_provider_opts(CLI::App* cmd, ProviderOpts& o) {
  cmd->add_option("--mock-provider", o.mock_dir, "Directory of canned provider responses");
  cmd->add_option("--kb", o.kb_dir, "Directory holding the ATT&CK bundles (default $AEGIS_KB_DIR or data/attack)");
  cmd->add_flag("--no-intel", o.no_intel, "Skip NVD and OTX lookups");
}

class Runner {
 public:
  explicit Runner(const CliEnv& env) : env_(env) {}

  std::ostream& out() const { return *env_.out; }
  std::ostream& err() const { return *env_.err; }

  std::shared_ptr<net::HttpClient> http() {
    if (!http_) http_ = env_.http ? env_.http : std::make_shared<net::HttplibClient>();
    return http_;
  }

  std::shared_ptr<const kb::KnowledgeBase> knowledge_base(const ProviderOpts& o) {
    const fs::path dir = o.kb_dir.empty() ? fs::path(getenv_or("AEGIS_KB_DIR", "data/attack")) : fs::path(o.kb_dir);
    return std::make_shared<const kb::KnowledgeBase>(load_kb_dir(dir));
  }

  // Keys come from the environment and are only handed to in-memory clients.
  pipeline::Handles handles(const ProviderOpts& o) {
    pipeline::Handles h;
    h.kb = knowledge_base(o);
    std::shared_ptr<llm::ChatProvider> provider;
    if (!o.mock_dir.empty()) {
      provider = std::make_shared<llm::FileMockProvider>(o.mock_dir);
    } else {
      llm::ProviderConfig cfg = llm::ProviderConfig::from_env();
      if (cfg.api_key.empty()) throw Error(Errc::MissingLlmKey, "set AEGIS_LLM_API_KEY or pass --mock-provider");
      provider = std::make_shared<llm::HttpChatProvider>(http(), std::move(cfg));
    }
    h.gateway = std::make_shared<llm::Gateway>(std::move(provider));
    if (o.mock_dir.empty() && !o.no_intel) {
      intel::IntelConfig ic;
      ic.nvd_api_key = getenv_or("AEGIS_NVD_API_KEY", "");
      ic.otx_api_key = getenv_or("AEGIS_OTX_API_KEY", "");
      h.nvd = std::make_shared<intel::NvdClient>(*http(), ic);
      if (!ic.otx_api_key.empty()) h.otx = std::make_shared<intel::OtxClient>(*http(), ic);
    }
    return h;
  }

  void warn_all(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err() << "warning: " << w << "\n";
  }

 private:
  const CliEnv& env_;
  std::shared_ptr<net::HttpClient> http_;
};

// ---- kb fetch ----

struct KbFetchArgs {
  std::string out_dir;
  std::vector<std::string> domains;
};

int kb_fetch(Runner& r, const KbFetchArgs& a) {
  fs::create_directories(a.out_dir);
  std::set<kb::Dataset> wanted;
  for (const auto& d : a.domains) {
    auto ds = kb::parse_dataset(d);
    if (!ds) throw Error(Errc::BadInput, "unknown dataset '" + d + "'");
    wanted.insert(*ds);
  }
  json manifest = json::array();
  for (const auto& [ds, name] : bundle_files()) {
    if (!wanted.empty() && !wanted.count(ds)) continue;
    net::HttpRequest req;
    req.url = std::string(kCtiBase) + name + "/" + name + ".json";
    const net::HttpResponse res = net::with_retry(net::RetryPolicy{}, [&] {
      net::HttpResponse resp = r.http()->send(req);
      if (auto code = net::classify_status(resp.status))
        throw Error(*code, req.url + " returned HTTP " + std::to_string(resp.status));
      return resp;
    });
    const json bundle = json::parse(res.body, nullptr, false);
    if (bundle.is_discarded()) throw Error(Errc::MalformedBundle, req.url + " did not return JSON");
    kb::KnowledgeBase probe;
    probe.add_bundle(bundle, ds);
    const std::string file = name + ".json";
    util::write_file((fs::path(a.out_dir) / file).string(), res.body);
    manifest.push_back({{"dataset", std::string(kb::to_string(ds))},
                        {"file", file},
                        {"url", req.url},
                        {"sha256", sha256_hex(res.body)},
                        {"attack_patterns", probe.size()},
                        {"fetched_at", util::utc_timestamp()}});
    r.out() << kb::to_string(ds) << ": " << probe.size() << " attack patterns -> " << file << "\n";
  }
  util::write_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2));
  return kExitOk;
}

// ---- run / batch / report ----

struct RunArgs {
  std::string profile, out, report_md, report_pdf;
  ProviderOpts provider;
};

void write_reports(const ThreatModelRun& run, const std::string& md_path, const std::string& pdf_path) {
  if (md_path.empty() && pdf_path.empty()) return;
  const std::string md = report::render_markdown(run);
  if (!md_path.empty()) util::write_file(md_path, md);
  if (!pdf_path.empty()) util::write_file(pdf_path, report::render_pdf(md));
}

int run_cmd(Runner& r, const RunArgs& a) {
  const ApplicationProfile profile = load_profile(a.profile);
  const ThreatModelRun run = pipeline::run_full(profile, PipelineConfig{}, r.handles(a.provider));
  persist_run(run, a.out);
  write_reports(run, a.report_md, a.report_pdf);
  r.warn_all(run.metadata.warnings);
  std::size_t mapped = 0;
  for (const auto& m : run.mappings) mapped += m.mapped ? 1 : 0;
  r.out() << "threats: " << run.threats.size() << "\nmapped: " << mapped << "\nwritten: " << a.out << "\n";
  return kExitOk;
}

struct BatchArgs {
  std::string profile, out, case_id = "1";
  int n = 30;
  int parallelism = 1;
  bool continue_on_error = false;
  ProviderOpts provider;
};

int batch_cmd(Runner& r, const BatchArgs& a) {
  const ApplicationProfile profile = load_profile(a.profile);
  pipeline::BatchOptions opt;
  opt.case_id = a.case_id;
  opt.parallelism = a.parallelism;
  opt.continue_on_error = a.continue_on_error;
  const auto m = pipeline::run_batch(profile, a.n, a.out, PipelineConfig{}, r.handles(a.provider), opt);
  for (const auto& f : m.failures) r.err() << "run " << f.run_index << " failed: " << f.error << "\n";
  r.out() << "case: " << m.case_id << "\nsucceeded: " << m.succeeded.size() << "/" << m.requested
          << "\nthreats: " << m.total_threats << "\n";
  return m.failures.empty() ? kExitOk : kExitFailure;
}

struct ReportArgs {
  std::string run, md, pdf;
};

int report_cmd(Runner& r, const ReportArgs& a) {
  if (a.md.empty() && a.pdf.empty()) throw CLI::RequiredError("--md or --pdf");
  write_reports(load_run(a.run), a.md, a.pdf);
  r.out() << "report written\n";
  return kExitOk;
}

// ---- serve ----

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  int ttl_minutes = 60;
  int workers = 4;
  std::string persist_dir;
  ProviderOpts provider;
};

int serve_cmd(Runner& r, const ServeArgs& a) {
  ServerOptions opt;
  opt.session_ttl = std::chrono::minutes(a.ttl_minutes);
  opt.workers = static_cast<std::size_t>(a.workers);
  if (!a.persist_dir.empty()) {
    fs::create_directories(a.persist_dir);
    opt.persist_dir = a.persist_dir;
  }
  ServerDeps deps;
  deps.kb = r.knowledge_base(a.provider);
  if (!a.provider.mock_dir.empty()) {
    const fs::path dir = a.provider.mock_dir;
    deps.provider_factory = [dir](const ProviderKeys&) { return std::make_shared<llm::FileMockProvider>(dir); };
    // The mock needs no credential; this placeholder only satisfies the session check.
    opt.default_keys = ProviderKeys("mock", "", "");
  } else {
    deps.provider_factory = http_provider_factory(llm::ProviderConfig::from_env(), r.http());
    opt.default_keys = ProviderKeys(getenv_or("AEGIS_LLM_API_KEY", ""), getenv_or("AEGIS_NVD_API_KEY", ""),
                                    getenv_or("AEGIS_OTX_API_KEY", ""));
    if (!a.provider.no_intel) deps.intel_http = r.http();
  }
  ApiServer server(std::move(opt), std::move(deps));
  const int port = server.bind(a.host, a.port);
  r.out() << "listening on http://" << a.host << ":" << port << std::endl;
  server.listen();
  return kExitOk;
}

// ---- eval ----

std::vector<double> tool_grades(const std::vector<ThreatModelRun>& runs) {
  std::vector<double> g;
  for (const auto& run : runs)
    for (const auto& t : run.threats) g.push_back(eval::fk_grade(t.scenario).grade);
  return g;
}

void print_stats(std::ostream& os, const std::string& label, const std::vector<double>& x) {
  const auto d = eval::descriptive_stats(x);
  os << label << ": n=" << d.n << " mean=" << util::fixed(d.mean, 3) << " sd=" << util::fixed(d.stdev, 3)
     << " median=" << util::fixed(d.median, 3) << " q1=" << util::fixed(d.q1, 3) << " q3=" << util::fixed(d.q3, 3)
     << " min=" << util::fixed(d.min, 3) << " max=" << util::fixed(d.max, 3)
     << " skewness=" << format_opt(d.skewness, 3) << " kurtosis=" << format_opt(d.kurtosis, 3) << "\n";
  if (d.n >= 8) {
    const auto nr = eval::normality_suite(x);
    os << label << " normality: anderson_darling=" << util::fixed(nr.anderson_darling.statistic, 4)
       << " p=" << util::fixed(nr.anderson_darling.p_value, 4)
       << " lilliefors_ks=" << util::fixed(nr.lilliefors_ks.statistic, 4)
       << " p=" << util::fixed(nr.lilliefors_ks.p_value, 4) << "\n";
  }
}

struct ReadabilityArgs {
  std::string runs, expert, case_id;
};

int eval_readability(Runner& r, const ReadabilityArgs& a) {
  const std::vector<double> tool = tool_grades(load_runs(a.runs));
  print_stats(r.out(), "tool", tool);
  if (a.expert.empty()) return kExitOk;
  std::vector<double> expert;
  for (const auto& e : eval::load_expert_corpus(a.expert))
    if (a.case_id.empty() || e.case_id == a.case_id) expert.push_back(eval::fk_grade(e.text).grade);
  print_stats(r.out(), "expert", expert);
  const auto m = eval::mann_whitney(tool, expert, eval::Alternative::Less);
  r.out() << "mann_whitney(less): W=" << util::fixed(m.w, 2) << " U=" << util::fixed(m.u, 2)
          << " z=" << format_opt(m.z, 4) << " p=" << util::fixed(m.p_value, 6)
          << " hodges_lehmann=" << util::fixed(m.hodges_lehmann, 4)
          << " rank_biserial=" << util::fixed(m.rank_biserial, 4) << "\n";
  return kExitOk;
}

struct SimilarityArgs {
  std::string runs, expert, case_id, embedder = "http", csv, json_out;
};

int eval_similarity(Runner& r, const SimilarityArgs& a) {
  const auto runs = load_runs(a.runs);
  const auto expert = eval::load_expert_corpus(a.expert);
  std::unique_ptr<eval::Embedder> embedder;
  if (a.embedder == "hashing")
    embedder = std::make_unique<eval::HashingEmbedder>();
  else
    embedder = std::make_unique<eval::HttpEmbedder>(r.http(), eval::EmbedConfig::from_env());
  const EvalProtocol protocol;
  const auto rep = eval::similarity_analysis(a.case_id, runs, expert, protocol, *embedder);
  for (const auto& b : rep.batches)
    r.out() << "batch " << b.batch_index << ": " << (b.success ? "success" : "no match")
            << " best=" << format_opt(b.best_score, 4) << "\n";
  const auto& v = rep.verdict;
  r.out() << "case " << v.case_id << ": " << v.successes << "/" << v.total_batches
          << " successes, p=" << util::fixed(v.p_value, 6) << ", lower_bound=" << util::fixed(v.lower_bound_95, 4)
          << ", majority=" << (v.passes ? "Yes" : "No") << "\n";
  if (!a.csv.empty()) util::write_file(a.csv, eval::similarity_csv(rep.records));
  if (!a.json_out.empty()) util::write_file(a.json_out, eval::report_json(rep).dump(2));
  return kExitOk;
}

struct MappingArgs {
  std::string runs, json_out;
  double benchmark = 0.80;
};

int eval_mapping(Runner& r, const MappingArgs& a) {
  const auto s = eval::mapping_stats(load_runs(a.runs));
  r.out() << "mapped: " << s.mapped << "\ntotal: " << s.total << "\nrate: " << util::fixed(100.0 * s.rate, 1)
          << "%\nhallucinated: " << s.hallucination_count << "\n";
  for (auto c : kStrideCategories) {
    const auto& pc = s.per_category[stride_index(c)];
    r.out() << "  " << to_string(c) << ": " << pc.mapped << "/" << pc.total << " (" << util::fixed(100.0 * pc.rate, 1)
            << "%)\n";
  }
  if (s.total > 0) {
    const auto p = eval::one_proportion(s.mapped, s.total, a.benchmark, eval::Alternative::Greater, 0.05);
    r.out() << "one_proportion(greater, p0=" << util::fixed(a.benchmark, 2) << "): p=" << util::fixed(p.p_value, 6)
            << " lower_bound=" << util::fixed(p.lower_bound, 4) << " method=" << eval::to_string(p.method) << "\n";
  }
  if (!a.json_out.empty()) util::write_file(a.json_out, eval::mapping_stats_json(s).dump(2));
  return kExitOk;
}

struct CorrelateArgs {
  std::string similarity, rubric, level = "both";
};

int eval_correlate(Runner& r, const CorrelateArgs& a) {
  const auto records = eval::similarity_from_csv(util::read_file(a.similarity));
  const auto rubric = eval::load_rubric_csv(a.rubric);
  auto print = [&](const char* title, const std::vector<eval::CorrelationRow>& rows) {
    r.out() << title << "\n";
    for (const auto& row : rows) r.out() << "  " << row.metric << ": " << format_opt(row.r, 4) << "\n";
  };
  if (a.level != "case") print("threat level", eval::correlate_threat_level(records, rubric));
  if (a.level != "threat") print("case level", eval::correlate_case_level(records, rubric));
  return kExitOk;
}

}  // namespace

kb::KnowledgeBase load_kb_dir(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& [ds, name] : bundle_files()) {
    const fs::path p = dir / (name + ".json");
    if (fs::exists(p)) paths.push_back(p);
  }
  if (paths.empty()) throw Error(Errc::FileMissing, "no ATT&CK bundles in " + dir.string() + " (run `kb fetch`)");
  return kb::KnowledgeBase::load_bundles(paths);
}

std::vector<ThreatModelRun> load_runs(const fs::path& path) {
  std::vector<ThreatModelRun> runs;
  if (fs::is_regular_file(path)) {
    runs.push_back(load_run(path));
    return runs;
  }
  if (!fs::is_directory(path)) throw Error(Errc::IoError, path.string() + " does not exist");
  for (const auto& f : enumerate_batch(path)) runs.push_back(load_run(f));
  if (runs.empty()) {
    std::vector<fs::path> cases;
    for (const auto& e : fs::directory_iterator(path))
      if (e.is_directory() && e.path().filename().string().rfind("case-", 0) == 0) cases.push_back(e.path());
    std::sort(cases.begin(), cases.end());
    for (const auto& c : cases)
      for (const auto& f : enumerate_batch(c)) runs.push_back(load_run(f));
  }
  if (runs.empty()) throw Error(Errc::IoError, "no runs found under " + path.string());
  return runs;
}

int cli_dispatch(int argc, const char* const* argv, const CliEnv& env) {
  CLI::App app{"Threat modeling pipeline and evaluation toolkit", "aegis"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  auto* kb_cmd = app.add_subcommand("kb", "ATT&CK knowledge base");
  kb_cmd->require_subcommand(1);
  KbFetchArgs kb_args;
  auto* fetch = kb_cmd->add_subcommand("fetch", "Download the ATT&CK STIX bundles");
  fetch->add_option("--out", kb_args.out_dir, "Destination directory")->required();
  fetch->add_option("--domains", kb_args.domains, "Enterprise, Mobile and/or ICS (default all)");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Generate one full threat model");
  run->add_option("--profile", run_args.profile, "Application profile JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_args.out, "Run JSON output")->required();
  run->add_option("--report-md", run_args.report_md, "Also write the markdown report");
  run->add_option("--report-pdf", run_args.report_pdf, "Also write the PDF report");
  add_provider_opts(run, run_args.provider);

  BatchArgs batch_args;
  auto* batch = app.add_subcommand("batch", "Generate n runs of one profile");
  batch->add_option("--profile", batch_args.profile, "Application profile JSON")->required()->check(CLI::ExistingFile);
  batch->add_option("-n", batch_args.n, "Number of runs")->check(CLI::PositiveNumber);
  batch->add_option("--out", batch_args.out, "Output directory (case-<id>/ is created inside)")->required();
  batch->add_option("--case-id", batch_args.case_id, "Case identifier");
  batch->add_option("--parallelism", batch_args.parallelism, "Concurrent runs")->check(CLI::PositiveNumber);
  batch->add_flag("--continue-on-error", batch_args.continue_on_error, "Keep going after a failed run");
  add_provider_opts(batch, batch_args.provider);

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--ttl-minutes", serve_args.ttl_minutes, "Session lifetime")->check(CLI::PositiveNumber);
  serve->add_option("--workers", serve_args.workers, "Pipeline worker threads")->check(CLI::PositiveNumber);
  serve->add_option("--persist-dir", serve_args.persist_dir, "Write every run to this directory");
  add_provider_opts(serve, serve_args.provider);

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "Render a stored run");
  rep->add_option("--run", report_args.run, "Run JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("--md", report_args.md, "Markdown output");
  rep->add_option("--pdf", report_args.pdf, "PDF output");

  auto* ev = app.add_subcommand("eval", "Evaluation toolkit");
  ev->require_subcommand(1);
  ReadabilityArgs rd_args;
  auto* rd = ev->add_subcommand("readability", "Flesch-Kincaid grade of threat descriptions");
  rd->add_option("--runs", rd_args.runs, "Run file or batch directory")->required()->check(CLI::ExistingPath);
  rd->add_option("--expert", rd_args.expert, "Expert corpus JSON; enables the one-sided comparison");
  rd->add_option("--case-id", rd_args.case_id, "Restrict expert threats to one case");
  SimilarityArgs sim_args;
  auto* sim = ev->add_subcommand("similarity", "Semantic similarity against expert threats");
  sim->add_option("--runs", sim_args.runs, "Batch directory")->required()->check(CLI::ExistingPath);
  sim->add_option("--expert", sim_args.expert, "Expert corpus JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--case-id", sim_args.case_id, "Case identifier")->required();
  sim->add_option("--embedder", sim_args.embedder, "http (reference model) or hashing (offline)")
      ->check(CLI::IsMember({"http", "hashing"}));
  sim->add_option("--csv", sim_args.csv, "Write the per-pair scores");
  sim->add_option("--json", sim_args.json_out, "Write the full report");
  MappingArgs map_args;
  auto* mp = ev->add_subcommand("mapping", "ATT&CK mapping rate");
  mp->add_option("--runs", map_args.runs, "Run file, batch directory or directory of cases")
      ->required()->check(CLI::ExistingPath);
  mp->add_option("--benchmark", map_args.benchmark, "Benchmark proportion")->check(CLI::Range(0.0, 1.0));
  mp->add_option("--json", map_args.json_out, "Write the statistics");
  CorrelateArgs cor_args;
  auto* cor = ev->add_subcommand("correlate", "Correlate similarity with rubric scores");
  cor->add_option("--similarity", cor_args.similarity, "Similarity CSV")->required()->check(CLI::ExistingFile);
  cor->add_option("--rubric", cor_args.rubric, "Rubric CSV")->required()->check(CLI::ExistingFile);
  cor->add_option("--level", cor_args.level, "threat, case or both")->check(CLI::IsMember({"threat", "case", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, *env.out, *env.err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Runner r(env);
  try {
    if (fetch->parsed()) return kb_fetch(r, kb_args);
    if (run->parsed()) return run_cmd(r, run_args);
    if (batch->parsed()) return batch_cmd(r, batch_args);
    if (serve->parsed()) return serve_cmd(r, serve_args);
    if (rep->parsed()) return report_cmd(r, report_args);
    if (rd->parsed()) return eval_readability(r, rd_args);
    if (sim->parsed()) return eval_similarity(r, sim_args);
    if (mp->parsed()) return eval_mapping(r, map_args);
    if (cor->parsed()) return eval_correlate(r, cor_args);
  } catch (const CLI::ParseError& e) {
    *env.err << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    *env.err << "error: " << errc_name(e.code()) << ": " << e.detail() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    *env.err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace aegis::app
