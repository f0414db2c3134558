#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aegis/domain/types.hpp"

namespace aegis::llm {

enum class PromptKind { ThreatModel, MitreSelect, Dread, Mitigations, TestCases, AttackTree };

inline constexpr std::array<PromptKind, 6> kPromptKinds = {
    PromptKind::ThreatModel, PromptKind::MitreSelect, PromptKind::Dread,
    PromptKind::Mitigations, PromptKind::TestCases,   PromptKind::AttackTree,
};

/// File-name style identifier: "threat_model", "mitre_select", ...
std::string_view kind_slug(PromptKind kind) noexcept;
std::optional<PromptKind> parse_kind_slug(std::string_view slug);

using Bindings = std::map<std::string, std::string, std::less<>>;

/// The stored template, placeholders still in place.
std::string_view prompt_template(PromptKind kind) noexcept;

/// Placeholder names in order of first appearance. A placeholder is a
/// lowercase identifier in single braces, e.g. {app_type}; JSON braces in
/// the templates' examples never match.
std::vector<std::string> placeholders(PromptKind kind);

/// Single-pass substitution: bound values are inserted literally and never
/// re-expanded. Extra bindings are ignored.
/// Throws Error(MissingBinding) naming the first unbound placeholder.
std::string render_prompt(PromptKind kind, const Bindings& bindings);

/// Bindings for the profile fields the templates reference:
/// app_type, industry_sector, authentication, internet_facing,
/// sensitive_data, app_input, technical_ability.
Bindings profile_bindings(const ApplicationProfile& profile);

}  // namespace aegis::llm
