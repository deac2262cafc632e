#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nsir/corpus.hpp"
#include "nsir/eval.hpp"
#include "nsir/prompts.hpp"
#include "nsir/translator.hpp"

namespace nsir {

/// A: topic of the positive, a: excluded entity, B/b: second topic/entity.
enum class Formulation { AMinusA, AMinusAUnionB, AMinusAUnionBMinusB };

/// "A_MINUS_A", "A_MINUS_A_UNION_B", "A_MINUS_A_UNION_B_MINUS_B".
std::string_view to_string(Formulation f);
/// Throws InvalidArgument.
Formulation parse_formulation(std::string_view s);
/// 1, 1, 3.
std::size_t negative_count(Formulation f);
prompts::Template generation_template(Formulation f);

struct NegConstraintItem {
  std::string query_id;
  Formulation formulation = Formulation::AMinusA;
  std::string query;
  std::vector<std::string> positive_ids;
  std::vector<std::string> negative_ids;
};

/// Throws SchemaViolation: exactly one positive, negative_count() negatives,
/// no id on both sides, non-empty query.
void validate(const NegConstraintItem& item);

struct NegConstraintSet {
  std::vector<NegConstraintItem> items;
  Corpus corpus;
};

/// Items JSONL {"query_id","formulation","query","positive_ids","negative_ids"},
/// each validated, ids unique. Throws MissingFile, MalformedRow and
/// SchemaViolation (detail = line).
std::vector<NegConstraintItem> read_negconstraint_items(const std::filesystem::path& path);

/// Items JSONL as above
/// plus a corpus JSONL. Every referenced id must be in the corpus. Throws
/// MissingFile, MalformedRow and SchemaViolation (detail = line).
NegConstraintSet load_negconstraint(const std::filesystem::path& items_path,
                                    const std::filesystem::path& corpus_path);
void write_negconstraint_items(const std::filesystem::path& path, const std::vector<NegConstraintItem>& items);

/// Positives relevance 1, negatives judged 0.
Qrels derive_qrels(const std::vector<NegConstraintItem>& items);
std::vector<Query> derive_queries(const std::vector<NegConstraintItem>& items);

/// Fills the formulation's generation template, asks the model, and
/// returns the first non-empty reply line with any "Query:" label and
/// surrounding whitespace removed. Throws InvalidArgument for a wrong
/// negative count, EndpointError and EmptyGeneration.
std::string generate_negconstraint(std::string_view positive_doc, const std::vector<std::string>& negative_docs,
                                   Formulation formulation, LlmClient& llm, const RetryPolicy& retry = {});

/// The prompt generate_negconstraint sends.
std::string generation_prompt(std::string_view positive_doc, const std::vector<std::string>& negative_docs,
                              Formulation formulation);

}  // namespace nsir
