#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <vector>

#include "aegis/domain/types.hpp"
#include "aegis/kb/attack_kb.hpp"
#include "aegis/net/http.hpp"

namespace aegis::app {

/// Process-level collaborators, injectable for tests.
struct CliEnv {
  /// Transport for every outbound call; null means a real HttplibClient.
  std::shared_ptr<net::HttpClient> http;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Verbs: kb fetch, run, batch, serve, report,
/// eval readability|similarity|mapping|correlate.
/// Returns 2 on usage errors and 1 when the operation fails.
int cli_dispatch(int argc, const char* const* argv, const CliEnv& env = {});

/// Loads enterprise-/mobile-/ics-attack.json from `dir`, whichever exist.
/// Throws Error(FileMissing) when none does.
kb::KnowledgeBase load_kb_dir(const std::filesystem::path& dir);

/// A run file, a batch case directory, or a directory of case-* directories.
/// Throws Error(IoError) when nothing loadable is found.
std::vector<ThreatModelRun> load_runs(const std::filesystem::path& path);

}  // namespace aegis::app
