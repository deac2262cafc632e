#include "nsir/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <thread>

#include "nsir/error.hpp"

namespace nsir {

CorpusIndex CorpusIndex::build(const Corpus& corpus, EmbeddingProvider& provider) {
  CorpusIndex index;
  if (corpus.empty()) return index;
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& d : corpus.documents()) texts.push_back(d.text);
  auto encoded = provider.batch_encode(texts, Side::NL);
  index.dim = encoded.front().dim();
  for (std::size_t k = 0; k < encoded.size(); ++k) {
    if (encoded[k].dim() != index.dim) {
      throw Error(ErrorCode::DimensionMismatch, "document " + corpus.documents()[k].id + " has dimension " +
                                                    std::to_string(encoded[k].dim()), k);
    }
    index.entries.push_back({corpus.documents()[k].id, std::move(encoded[k].cls), k});
  }
  return index;
}

std::vector<Candidate> first_stage_retrieve(std::span<const double> query_cls, const CorpusIndex& index,
                                            std::size_t k) {
  if (index.entries.empty()) throw Error(ErrorCode::EmptyIndex, "first-stage index is empty");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  std::vector<Candidate> all;
  all.reserve(index.entries.size());
  for (const auto& e : index.entries) all.push_back({e.doc_id, dot(query_cls, e.cls)});
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.first_stage != b.first_stage) return a.first_stage > b.first_stage;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

SideAnalysis analyze_side(const EncodedText& nl, const EncodedText& fol, std::string_view fol_text,
                          const ScoringOptions& options) {
  SideAnalysis s;
  s.fol_tokens = fol::tokenize_fol(fol_text);
  if (fol.token_matrix.rows() != s.fol_tokens.tokens.size()) {
    throw Error(ErrorCode::ShapeMismatch, "FOL encoding has " + std::to_string(fol.token_matrix.rows()) +
                                              " rows for " + std::to_string(s.fol_tokens.tokens.size()) +
                                              " parser tokens");
  }
  for (const auto& t : s.fol_tokens.tokens) s.fol_labels.push_back(t.surface);
  s.fol_rows = fol.token_matrix;

  if (options.include_cls) {
    std::vector<Vector> rows{nl.cls};
    for (std::size_t r = 0; r < nl.token_matrix.rows(); ++r) {
      const auto row = nl.token_matrix.row(r);
      rows.emplace_back(row.begin(), row.end());
    }
    s.nl_rows = Matrix::from_rows(rows);
    s.nl_labels.push_back("[CLS]");
  } else {
    s.nl_rows = nl.token_matrix;
  }
  s.nl_labels.insert(s.nl_labels.end(), nl.surface_tokens.begin(), nl.surface_tokens.end());

  s.cost = ot::build_cost_matrix(s.nl_rows, s.fol_rows);
  auto [a, b] = ot::uniform_marginals(s.nl_rows.rows(), s.fol_rows.rows());
  s.plan = ot::solve_ot({s.cost, std::move(a), std::move(b)});
  s.sigma = assign_sigma(s.fol_tokens, s.plan);
  const double d_k = options.d_k.value_or(static_cast<double>(nl.dim()));
  s.attention = attend(s.nl_rows, s.fol_rows, s.sigma, d_k);
  s.fused = fuse_cls(s.nl_rows, s.plan.plan, s.fol_rows, nl.cls, options.normalize);
  s.pooled = options.normalize ? normalized(s.attention.pooled) : s.attention.pooled;
  return s;
}

void sort_breakdowns(std::vector<ScoreBreakdown>& rows) {
  std::sort(rows.begin(), rows.end(), [](const ScoreBreakdown& a, const ScoreBreakdown& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    if (a.first_stage != b.first_stage) return a.first_stage > b.first_stage;
    return a.doc_id < b.doc_id;
  });
}

Reranker::Reranker(EmbeddingProvider& provider, Translator& translator, const Corpus& corpus,
                   RerankOptions options)
    : provider_(provider), translator_(translator), corpus_(corpus), options_(options) {}

SideAnalysis Reranker::analyze(std::string_view text, TranslationKind kind) {
  const TranslationRecord record = translator_.translate(text, kind);
  const EncodedText nl = provider_.encode(text, Side::NL);
  const EncodedText fol = provider_.encode(record.fol_text, Side::FOL);
  if (nl.dim() != fol.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "NL and FOL encodings disagree on dimension");
  }
  return analyze_side(nl, fol, record.fol_text, options_.scoring);
}

SideAnalysis Reranker::analyze_query(std::string_view query) {
  try {
    translator_.translate(query, TranslationKind::Query);
  } catch (const Error& e) {
    throw Error(ErrorCode::QueryTranslationFailure, std::string("query translation failed: ") + e.what());
  }
  return analyze(query, TranslationKind::Query);
}

SideAnalysis Reranker::analyze_document(const std::string& doc_id) {
  return analyze(corpus_.at(doc_id).text, TranslationKind::Document);
}

RerankResult Reranker::rerank(std::string_view query, const std::vector<Candidate>& candidates) {
  RerankResult result;
  result.rows.reserve(candidates.size());
  for (const auto& c : candidates) {
    result.rows.push_back({c.doc_id, c.first_stage, std::nullopt, std::nullopt, c.first_stage, false, {}});
  }

  SideAnalysis q;
  try {
    q = analyze_query(query);
  } catch (const Error& e) {
    result.query_failure = e.what();
    for (auto& row : result.rows) {
      row.fallback_used = true;
      row.fallback_reason = e.what();
    }
    sort_breakdowns(result.rows);
    return result;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < result.rows.size(); k = next++) {
      auto& row = result.rows[k];
      try {
        const SideAnalysis d = analyze_document(row.doc_id);
        const double s1 = score1(q.fused, d.fused);
        const double s2 = score2(q.pooled, d.pooled);
        row.score1 = s1;
        row.score2 = s2;
        row.combined = options_.scoring.w1 * s1 + options_.scoring.w2 * s2;
      } catch (const Error& e) {
        row.score1.reset();
        row.score2.reset();
        row.combined = row.first_stage;
        row.fallback_used = true;
        row.fallback_reason = e.what();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(options_.threads, 1, std::max<std::size_t>(1, result.rows.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  sort_breakdowns(result.rows);
  return result;
}

std::vector<RunRow> run_query_set(const std::vector<Query>& queries, EmbeddingProvider& provider,
                                  const CorpusIndex& index, Reranker& reranker, std::size_t k,
                                  std::vector<RerankResult>* details) {
  std::vector<RunRow> rows;
  for (const auto& q : queries) {
    const EncodedText qe = provider.encode(q.text, Side::NL);
    const auto candidates = first_stage_retrieve(qe.cls, index, k);
    RerankResult r = reranker.rerank(q.text, candidates);
    for (std::size_t rank = 0; rank < r.rows.size(); ++rank) {
      rows.push_back({q.id, r.rows[rank].doc_id, rank + 1, r.rows[rank].combined});
    }
    if (details) details->push_back(std::move(r));
  }
  return rows;
}

std::string format_run_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", score == 0.0 ? 0.0 : score);
  return buf;
}

void write_trec_run(std::ostream& out, const std::vector<RunRow>& rows, std::string_view run_tag) {
  for (const auto& r : rows) {
    out << r.qid << " Q0 " << r.doc_id << ' ' << r.rank << ' ' << format_run_score(r.score) << ' ' << run_tag << '\n';
  }
}

}  // namespace nsir
