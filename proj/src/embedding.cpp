#include "nsir/embedding.hpp"

#include <algorithm>
#include <array>

#include "nsir/error.hpp"
#include "nsir/fol_parser.hpp"

namespace nsir {

std::string_view to_string(Side side) { return side == Side::NL ? "nl" : "fol"; }

void validate(const EncodedText& e) {
  const std::size_t d = e.cls.size();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "empty CLS vector");
  if (e.token_matrix.rows() != e.surface_tokens.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(e.token_matrix.rows()) + " token rows for " +
                    std::to_string(e.surface_tokens.size()) + " surface tokens");
  }
  if (e.token_matrix.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "no token rows");
  if (e.token_matrix.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch,
                "token dimension " + std::to_string(e.token_matrix.cols()) +
                    " differs from CLS dimension " + std::to_string(d));
  }
  if (!all_finite(e.cls) || !all_finite(e.token_matrix.data())) {
    throw Error(ErrorCode::NumericalFailure, "non-finite embedding entry");
  }
}

Sha256 text_key(std::string_view text, Side side) {
  std::string buf;
  buf.reserve(text.size() + 1);
  buf.push_back(static_cast<char>(side));
  buf.append(text);
  return sha256(buf);
}

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
  }
  return true;
}

std::string_view strip_marker(std::string_view tok) {
  for (std::string_view marker : {std::string_view("##"), std::string_view("▁"),
                                  std::string_view("Ġ")}) {
    if (tok.starts_with(marker)) {
      tok.remove_prefix(marker.size());
      break;
    }
  }
  return tok;
}

bool is_special(std::string_view tok) {
  static constexpr std::array kSpecial = {"[CLS]", "[SEP]", "[PAD]", "<s>", "</s>", "<pad>"};
  for (std::string_view s : kSpecial) {
    if (tok == s) return true;
  }
  return false;
}

std::size_t codepoint_length(std::string_view s, std::size_t i) {
  const auto lead = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if ((lead & 0xE0) == 0xC0) len = 2;
  else if ((lead & 0xF0) == 0xE0) len = 3;
  else if ((lead & 0xF8) == 0xF0) len = 4;
  return std::min(len, s.size() - i);
}

}  // namespace

std::vector<Segment> segment_text(std::string_view text, Side side) {
  std::vector<Segment> out;
  if (side == Side::FOL) {
    const auto seq = fol::tokenize_fol(text);
    out.reserve(seq.tokens.size());
    for (const auto& t : seq.tokens) out.push_back({t.surface, t.begin, t.end});
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(text[i])) ++i;
    out.push_back({std::string(text.substr(start, i - start)), start, i});
  }
  return out;
}

EncodedText pool_subwords(std::string_view text, Side side, Vector cls,
                          const std::vector<std::string>& subword_tokens,
                          const Matrix& subword_vectors) {
  if (subword_tokens.size() != subword_vectors.rows()) {
    throw Error(ErrorCode::ProviderUnavailable,
                std::to_string(subword_tokens.size()) + " subword tokens but " +
                    std::to_string(subword_vectors.rows()) + " vectors");
  }
  if (!subword_tokens.empty() && subword_vectors.cols() != cls.size()) {
    throw Error(ErrorCode::ProviderUnavailable, "subword and CLS dimensions differ");
  }

  const auto segments = segment_text(text, side);
  if (segments.empty()) throw Error(ErrorCode::InvalidArgument, "text has no words to encode");

  const std::size_t d = cls.size();
  Matrix sums(segments.size(), d);
  std::vector<std::size_t> counts(segments.size(), 0);

  std::size_t cursor = 0;
  std::size_t seg = 0;  // first segment whose end is beyond the cursor
  auto segment_at = [&](std::size_t pos) -> std::ptrdiff_t {
    while (seg < segments.size() && segments[seg].end <= pos) ++seg;
    if (seg < segments.size() && segments[seg].begin <= pos) return static_cast<std::ptrdiff_t>(seg);
    return -1;
  };

  for (std::size_t k = 0; k < subword_tokens.size(); ++k) {
    if (is_special(subword_tokens[k])) continue;
    const std::string_view piece = strip_marker(subword_tokens[k]);
    if (piece.empty()) continue;

    std::size_t p = cursor;
    while (p < text.size() && is_space(text[p])) ++p;
    if (p >= text.size()) continue;

    const std::ptrdiff_t target = segment_at(p);
    if (iequals(text.substr(p, piece.size()), piece)) {
      cursor = p + piece.size();
    } else if (target >= 0) {
      cursor = segments[static_cast<std::size_t>(target)].end;
    } else {
      cursor = p + codepoint_length(text, p);
    }
    if (target < 0) continue;

    auto row = sums.row(static_cast<std::size_t>(target));
    const auto v = subword_vectors.row(k);
    for (std::size_t c = 0; c < d; ++c) row[c] += v[c];
    ++counts[static_cast<std::size_t>(target)];
  }

  std::size_t covered = segments.size();
  while (covered > 0 && counts[covered - 1] == 0) --covered;
  if (covered < segments.size()) {
    throw Error(ErrorCode::TokenLimitExceeded,
                "backend covered " + std::to_string(covered) + " of " +
                    std::to_string(segments.size()) + " words",
                covered);
  }

  EncodedText out;
  out.text_hash = text_key(text, side);
  out.cls = std::move(cls);
  out.token_matrix = Matrix(segments.size(), d);
  out.surface_tokens.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (counts[s] == 0) {
      throw Error(ErrorCode::ProviderUnavailable,
                  "no subword vectors for word " + std::to_string(s) + " '" +
                      segments[s].surface + "'",
                  s);
    }
    const double inv = 1.0 / static_cast<double>(counts[s]);
    auto dst = out.token_matrix.row(s);
    const auto src = sums.row(s);
    for (std::size_t c = 0; c < d; ++c) dst[c] = src[c] * inv;
    out.surface_tokens.push_back(segments[s].surface);
  }
  return out;
}

std::vector<EncodedText> EmbeddingProvider::batch_encode(const std::vector<std::string>& texts,
                                                         Side side) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "batch_encode of an empty list");
  std::vector<EncodedText> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(encode(texts[i], side));
    } catch (const Error& e) {
      throw Error(e.code(), "item " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  return out;
}

}  // namespace nsir
