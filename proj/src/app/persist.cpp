#include "aegis/app/persist.hpp"

#include <algorithm>
#include <regex>

#include "aegis/domain/json_io.hpp"
#include "aegis/error.hpp"
#include "aegis/util.hpp"

namespace aegis::app {

using nlohmann::json;

json run_document(const ThreatModelRun& run) {
  json j = run;
  j["schema_version"] = kRunSchemaVersion;
  return j;
}

ThreatModelRun run_from_document(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::SchemaViolation, "run document must be an object");
  const auto it = doc.find("schema_version");
  if (it == doc.end() || !it->is_number_integer())
    throw Error(Errc::SchemaVersionMismatch,
                "no schema_version; regenerate the run or add \"schema_version\": " +
                    std::to_string(kRunSchemaVersion));
  const int v = it->get<int>();
  if (v != kRunSchemaVersion)
    throw Error(Errc::SchemaVersionMismatch,
                "file has schema_version " + std::to_string(v) + ", this build reads " +
                    std::to_string(kRunSchemaVersion) +
                    (v > kRunSchemaVersion ? "; upgrade the tool" : "; re-run to regenerate"));
  return run_from_json(doc);
}

void persist_run(const ThreatModelRun& run, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, path.parent_path().string() + ": " + ec.message());
  util::write_file(path.string(), run_document(run).dump(2));
}

ThreatModelRun load_run(const std::filesystem::path& path) {
  const std::string text = util::read_file(path.string());
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::IoError, path.string() + " is not valid JSON");
  return run_from_document(doc);
}

std::vector<std::filesystem::path> enumerate_batch(const std::filesystem::path& case_dir) {
  if (!std::filesystem::is_directory(case_dir)) throw Error(Errc::IoError, case_dir.string() + " is not a directory");
  std::vector<std::filesystem::path> out;
  const auto manifest = case_dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    const json m = json::parse(util::read_file(manifest.string()), nullptr, false);
    if (m.is_discarded()) throw Error(Errc::IoError, manifest.string() + " is not valid JSON");
    for (const auto& f : m.value("files", json::array())) out.push_back(case_dir / f.get<std::string>());
    return out;
  }
  static const std::regex re(R"(batch-(\d+)\.json)");
  std::vector<std::pair<long, std::filesystem::path>> found;
  for (const auto& e : std::filesystem::directory_iterator(case_dir)) {
    const std::string name = e.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, re)) found.emplace_back(std::stol(m[1].str()), e.path());
  }
  std::sort(found.begin(), found.end());
  for (auto& [k, p] : found) out.push_back(std::move(p));
  return out;
}

}  // namespace aegis::app
