#pragma once

#include <filesystem>
#include <vector>

#include "aegis/domain/types.hpp"
#include "json.hpp"

namespace aegis::app {

inline constexpr int kRunSchemaVersion = 1;

/// Run JSON with "schema_version" added at the top level.
nlohmann::json run_document(const ThreatModelRun& run);
/// Throws Error(SchemaVersionMismatch) for any other version.
ThreatModelRun run_from_document(const nlohmann::json& doc);

/// Throws Error(IoError).
void persist_run(const ThreatModelRun& run, const std::filesystem::path& path);
/// Throws Error(IoError | SchemaVersionMismatch) or the reader's schema errors.
ThreatModelRun load_run(const std::filesystem::path& path);

/// Run files of a batch case directory in manifest order; falls back to
/// numeric batch order when there is no manifest.
std::vector<std::filesystem::path> enumerate_batch(const std::filesystem::path& case_dir);

}  // namespace aegis::app
