#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsir/connective_constraint.hpp"
#include "nsir/corpus.hpp"
#include "nsir/embedding.hpp"
#include "nsir/fol_parser.hpp"
#include "nsir/logic_align.hpp"
#include "nsir/ot_align.hpp"
#include "nsir/translator.hpp"

namespace nsir {

/// First-stage vectors for every document, in corpus order.
struct CorpusIndex {
  struct Entry {
    std::string doc_id;
    Vector cls;
    std::size_t text_ref = 0;  // position in Corpus::documents()
  };
  std::vector<Entry> entries;
  std::size_t dim = 0;

  /// NL-side CLS of every document. Throws DimensionMismatch on mixed d.
  static CorpusIndex build(const Corpus& corpus, EmbeddingProvider& provider);
};

struct Candidate {
  std::string doc_id;
  double first_stage = 0.0;
};

/// Top-k by raw inner product, ties by ascending doc_id. Throws EmptyIndex,
/// InvalidArgument (k = 0) and DimensionMismatch.
std::vector<Candidate> first_stage_retrieve(std::span<const double> query_cls, const CorpusIndex& index,
                                            std::size_t k);

struct ScoreBreakdown {
  std::string doc_id;
  double first_stage = 0.0;
  std::optional<double> score1;
  std::optional<double> score2;
  double combined = 0.0;
  bool fallback_used = false;
  std::string fallback_reason;
};

struct ScoringOptions {
  double w1 = 1.0;
  double w2 = 1.0;
  /// Normalizes both the fused CLS vector and the pooled attention output.
  bool normalize = true;
  /// Attention scale; the embedding dimension when unset.
  std::optional<double> d_k;
  /// Prepend the NL CLS vector to H (ablation).
  bool include_cls = false;
};

/// Everything one side (query or document) contributes to the scores.
struct SideAnalysis {
  std::vector<std::string> nl_labels;
  std::vector<std::string> fol_labels;
  fol::FolTokenSeq fol_tokens;
  TokenMatrix nl_rows;
  TokenMatrix fol_rows;
  Matrix cost;
  ot::AlignmentPlan plan;
  SigmaMatrix sigma;
  AttentionResult attention;
  FusedVector fused;
  Vector pooled;  // normalized when ScoringOptions::normalize
};

/// Throws ShapeMismatch when the FOL encoding does not line up with the
/// parser's tokens, plus the errors of the scoring modules.
SideAnalysis analyze_side(const EncodedText& nl, const EncodedText& fol, std::string_view fol_text,
                          const ScoringOptions& options);

/// Orders by combined desc, first_stage desc, doc_id asc.
void sort_breakdowns(std::vector<ScoreBreakdown>& rows);

struct RerankOptions {
  ScoringOptions scoring;
  std::size_t threads = 4;
};

struct RerankResult {
  std::vector<ScoreBreakdown> rows;
  /// Set when the query side failed and every row fell back.
  std::optional<std::string> query_failure;
};

class Reranker {
 public:
  Reranker(EmbeddingProvider& provider, Translator& translator, const Corpus& corpus, RerankOptions options = {});

  /// Scores each candidate; a failing document keeps its first-stage score
  /// with fallback_used set. If the query itself cannot be translated or
  /// encoded, every row falls back and query_failure carries the reason.
  RerankResult rerank(std::string_view query, const std::vector<Candidate>& candidates);

  /// The query side alone; throws QueryTranslationFailure when the query
  /// has no usable translation.
  SideAnalysis analyze_query(std::string_view query);
  SideAnalysis analyze_document(const std::string& doc_id);

  const RerankOptions& options() const noexcept { return options_; }

 private:
  SideAnalysis analyze(std::string_view text, TranslationKind kind);

  EmbeddingProvider& provider_;
  Translator& translator_;
  const Corpus& corpus_;
  RerankOptions options_;
};

struct RunRow {
  std::string qid;
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0.0;
};

/// First stage plus rerank for every query, rows in query order.
std::vector<RunRow> run_query_set(const std::vector<Query>& queries, EmbeddingProvider& provider,
                                  const CorpusIndex& index, Reranker& reranker, std::size_t k,
                                  std::vector<RerankResult>* details = nullptr);

/// "qid Q0 doc rank score tag" lines.
void write_trec_run(std::ostream& out, const std::vector<RunRow>& rows, std::string_view run_tag);
std::string format_run_score(double score);

}  // namespace nsir
