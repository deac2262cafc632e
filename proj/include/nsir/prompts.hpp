#pragma once

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nsir::prompts {

enum class Template {
  Nl2FolQuery,
  Nl2FolDocument,
  GenerateAMinusA,
  GenerateAMinusAUnionB,
  GenerateAMinusAUnionBMinusB,
};

inline constexpr std::array kAllTemplates = {
    Template::Nl2FolQuery,           Template::Nl2FolDocument,
    Template::GenerateAMinusA,       Template::GenerateAMinusAUnionB,
    Template::GenerateAMinusAUnionBMinusB,
};

/// File stem under prompts/, e.g. "nl2fol_query".
std::string_view name(Template t);

/// Template text exactly as stored in prompts/<name>.txt.
std::string_view text(Template t);

/// Distinct %PLACEHOLDER% markers in order of first appearance.
std::vector<std::string> placeholders(Template t);

/// Replaces each marker with its value in one left-to-right pass, so values
/// that themselves contain markers are not expanded again. Every marker
/// needs a value and every key must be a marker of `t` (InvalidArgument).
std::string instantiate(Template t, const std::map<std::string, std::string>& values);

}  // namespace nsir::prompts
