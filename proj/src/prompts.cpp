#include "nsir/prompts.hpp"

#include <algorithm>

#include "nsir/error.hpp"

namespace nsir::prompts {

namespace detail {
extern const std::string_view kNl2FolQuery;
extern const std::string_view kNl2FolDocument;
extern const std::string_view kGenerateAMinusA;
extern const std::string_view kGenerateAMinusAUnionB;
extern const std::string_view kGenerateAMinusAUnionBMinusB;
}  // namespace detail

std::string_view name(Template t) {
  switch (t) {
    case Template::Nl2FolQuery: return "nl2fol_query";
    case Template::Nl2FolDocument: return "nl2fol_document";
    case Template::GenerateAMinusA: return "generate_a_minus_a";
    case Template::GenerateAMinusAUnionB: return "generate_a_minus_a_union_b";
    case Template::GenerateAMinusAUnionBMinusB: return "generate_a_minus_a_union_b_minus_b";
  }
  return "unknown";
}

std::string_view text(Template t) {
  switch (t) {
    case Template::Nl2FolQuery: return detail::kNl2FolQuery;
    case Template::Nl2FolDocument: return detail::kNl2FolDocument;
    case Template::GenerateAMinusA: return detail::kGenerateAMinusA;
    case Template::GenerateAMinusAUnionB: return detail::kGenerateAMinusAUnionB;
    case Template::GenerateAMinusAUnionBMinusB: return detail::kGenerateAMinusAUnionBMinusB;
  }
  return {};
}

namespace {

bool is_marker_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ' ' || c == '_';
}

// Length of the marker starting at `pos`, or 0 if there is none. Markers are
// %UPPER CASE% with at least one letter.
std::size_t marker_length(std::string_view s, std::size_t pos) {
  if (s[pos] != '%') return 0;
  std::size_t k = pos + 1;
  while (k < s.size() && is_marker_char(s[k])) ++k;
  if (k == pos + 1 || k >= s.size() || s[k] != '%') return 0;
  if (s[pos + 1] == ' ' || s[k - 1] == ' ') return 0;
  return k + 1 - pos;
}

}  // namespace

std::vector<std::string> placeholders(Template t) {
  const std::string_view s = text(t);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (const std::size_t len = marker_length(s, i)) {
      std::string marker(s.substr(i, len));
      if (std::find(out.begin(), out.end(), marker) == out.end()) out.push_back(std::move(marker));
      i += len - 1;
    }
  }
  return out;
}

std::string instantiate(Template t, const std::map<std::string, std::string>& values) {
  const auto markers = placeholders(t);
  for (const auto& m : markers) {
    if (!values.contains(m)) {
      throw Error(ErrorCode::InvalidArgument, "no value for " + m + " in template " + std::string(name(t)));
    }
  }
  for (const auto& [key, value] : values) {
    if (std::find(markers.begin(), markers.end(), key) == markers.end()) {
      throw Error(ErrorCode::InvalidArgument, key + " is not a marker of template " + std::string(name(t)));
    }
  }

  const std::string_view s = text(t);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (const std::size_t len = marker_length(s, i)) {
      out += values.at(std::string(s.substr(i, len)));
      i += len;
    } else {
      out += s[i++];
    }
  }
  return out;
}

}  // namespace nsir::prompts
