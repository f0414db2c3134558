#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "aegis/domain/types.hpp"

namespace aegis::report {

inline constexpr std::string_view kReportTitle = "AegisShield Security Report";

/// Section headings in their fixed order.
inline constexpr std::array<std::string_view, 8> kSectionHeadings = {
    "Application Description", "Improvement Suggestions", "STRIDE Threat Model",
    "MITRE ATT&CK",            "Mitigations",             "DREAD Risk Assessment",
    "Attack Tree",             "Test Cases",
};

inline constexpr std::string_view kNotGenerated = "This section was not generated for this run.";

/// Pure and deterministic. Optional artifacts that are absent render as
/// kNotGenerated.
std::string render_markdown(const ThreatModelRun& run);

/// Minimal PDF 1.4 with a plain-text layer (standard Type 1 fonts). Tables
/// wrap inside their cells; nothing is truncated. Best effort on malformed
/// markdown. Throws Error(RenderFailed).
std::string render_pdf(std::string_view markdown);

/// Escapes a value for a markdown table cell (pipes escaped, newlines joined).
std::string table_cell(std::string_view text);

}  // namespace aegis::report
