#include "nsir/fol_parser.hpp"

#include <array>
#include <optional>

#include "nsir/error.hpp"

namespace nsir::fol {
namespace {

struct Symbol {
  std::string_view spelling;
  std::string_view canonical;
  TokenClass kind;
};

// Longest spellings first so "<->" wins over "->".
constexpr std::array kSymbols = {
    Symbol{"<->", "↔", TokenClass::BinaryConnective},
    Symbol{"->", "→", TokenClass::BinaryConnective},
    Symbol{"¬", "¬", TokenClass::Negation},
    Symbol{"∧", "∧", TokenClass::BinaryConnective},
    Symbol{"∨", "∨", TokenClass::BinaryConnective},
    Symbol{"→", "→", TokenClass::BinaryConnective},
    Symbol{"↔", "↔", TokenClass::BinaryConnective},
    Symbol{"⊕", "⊕", TokenClass::BinaryConnective},
    Symbol{"∀", "∀", TokenClass::Quantifier},
    Symbol{"∃", "∃", TokenClass::Quantifier},
    Symbol{"~", "¬", TokenClass::Negation},
    Symbol{"&", "∧", TokenClass::BinaryConnective},
    Symbol{"|", "∨", TokenClass::BinaryConnective},
};

// Word aliases apply only to bare identifiers (not predicate names).
constexpr std::array kWordAliases = {
    Symbol{"not", "¬", TokenClass::Negation},
    Symbol{"xor", "⊕", TokenClass::BinaryConnective},
    Symbol{"forall", "∀", TokenClass::Quantifier},
    Symbol{"exists", "∃", TokenClass::Quantifier},
};

constexpr std::string_view kPunctuation = "(),[]{}.:;=";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_ascii_ident(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '\'' || c == '-';
}

// Length of the UTF-8 sequence starting at s[i], or 0 if malformed.
std::size_t utf8_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) len = 2;
  else if ((lead & 0xF0) == 0xE0) len = 3;
  else if ((lead & 0xF8) == 0xF0) len = 4;
  else return 0;
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return 0;
  }
  return len;
}

std::optional<Symbol> match_symbol(std::string_view s, std::size_t i) {
  for (const auto& sym : kSymbols) {
    if (s.substr(i, sym.spelling.size()) == sym.spelling) return sym;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::Negation: return "Negation";
    case TokenClass::BinaryConnective: return "BinaryConnective";
    case TokenClass::Quantifier: return "Quantifier";
    case TokenClass::Predicate: return "Predicate";
    case TokenClass::Term: return "Term";
    case TokenClass::Punctuation: return "Punctuation";
  }
  return "?";
}

FolTokenSeq tokenize_fol(std::string_view formula) {
  FolTokenSeq seq;
  seq.source = std::string(formula);
  const std::string_view s = seq.source;

  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (auto sym = match_symbol(s, i)) {
      seq.tokens.push_back({std::string(sym->canonical), sym->kind, i, i + sym->spelling.size()});
      i += sym->spelling.size();
      continue;
    }
    if (kPunctuation.find(c) != std::string_view::npos) {
      seq.tokens.push_back({std::string(1, c), TokenClass::Punctuation, i, i + 1});
      ++i;
      continue;
    }
    if (c == '"') {
      const std::size_t close = s.find('"', i + 1);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::UnknownSymbol, "unterminated quote at byte " + std::to_string(i), i);
      }
      seq.tokens.push_back({std::string(s.substr(i, close + 1 - i)), TokenClass::Term, i, close + 1});
      i = close + 1;
      continue;
    }

    // Identifier: ASCII word characters plus any non-symbol UTF-8 code point.
    const std::size_t start = i;
    while (i < s.size()) {
      const char ch = s[i];
      if (static_cast<unsigned char>(ch) < 0x80) {
        if (!is_ascii_ident(ch)) break;
        if (ch == '-' && s.substr(i, 2) == "->") break;
        ++i;
        continue;
      }
      if (match_symbol(s, i)) break;
      const std::size_t len = utf8_length(s, i);
      if (len == 0) {
        throw Error(ErrorCode::UnknownSymbol, "invalid UTF-8 at byte " + std::to_string(i), i);
      }
      i += len;
    }
    if (i == start) {
      throw Error(ErrorCode::UnknownSymbol,
                  "unexpected '" + std::string(1, c) + "' at byte " + std::to_string(i), i);
    }

    const std::string_view word = s.substr(start, i - start);
    if (i < s.size() && s[i] == '(') {
      seq.tokens.push_back({std::string(word), TokenClass::Predicate, start, i});
      continue;
    }
    bool aliased = false;
    for (const auto& alias : kWordAliases) {
      if (word == alias.spelling) {
        seq.tokens.push_back({std::string(alias.canonical), alias.kind, start, i});
        aliased = true;
        break;
      }
    }
    if (!aliased) seq.tokens.push_back({std::string(word), TokenClass::Term, start, i});
  }

  if (seq.tokens.empty()) throw Error(ErrorCode::EmptyFormula, "formula is blank");
  return seq;
}

std::string normalize_fol(std::string_view formula) {
  const FolTokenSeq seq = tokenize_fol(formula);
  std::string out;
  std::size_t cursor = 0;
  for (const auto& t : seq.tokens) {
    out.append(formula.substr(cursor, t.begin - cursor));
    out.append(t.surface);
    cursor = t.end;
  }
  out.append(formula.substr(cursor));
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

constexpr std::string_view kConclusion = "Conclusion:";
constexpr std::string_view kSeparator = ":::";

}  // namespace

std::vector<std::string> extract_fol_from_llm_response(std::string_view response) {
  const auto lines = split_lines(response);

  std::optional<std::size_t> header;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (trim(lines[k]).starts_with(kConclusion)) header = k;
  }
  if (!header) throw Error(ErrorCode::NoFormulaFound, "no Conclusion: block in response");

  std::vector<std::string> formulas;
  auto take = [&](std::string_view line) {
    const std::size_t sep = line.find(kSeparator);
    if (sep == std::string_view::npos) return;
    const std::string_view f = trim(line.substr(0, sep));
    if (!f.empty()) formulas.emplace_back(f);
  };

  take(trim(lines[*header]).substr(kConclusion.size()));
  for (std::size_t k = *header + 1; k < lines.size(); ++k) take(lines[k]);

  if (formulas.empty()) {
    throw Error(ErrorCode::NoFormulaFound, "Conclusion: block has no ':::' formula lines");
  }
  return formulas;
}

std::string join_formulas(const std::vector<std::string>& formulas) {
  if (formulas.empty()) throw Error(ErrorCode::EmptyList, "no formulas to join");
  std::string out = formulas.front();
  for (std::size_t k = 1; k < formulas.size(); ++k) {
    out.push_back('\n');
    out.append(formulas[k]);
  }
  return out;
}

}  // namespace nsir::fol
