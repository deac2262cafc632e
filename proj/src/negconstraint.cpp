#include "nsir/negconstraint.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>

#include "nsir/error.hpp"

namespace nsir {

using nlohmann::json;

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::AMinusA: return "A_MINUS_A";
    case Formulation::AMinusAUnionB: return "A_MINUS_A_UNION_B";
    case Formulation::AMinusAUnionBMinusB: return "A_MINUS_A_UNION_B_MINUS_B";
  }
  return "unknown";
}

Formulation parse_formulation(std::string_view s) {
  for (auto f : {Formulation::AMinusA, Formulation::AMinusAUnionB, Formulation::AMinusAUnionBMinusB}) {
    if (s == to_string(f)) return f;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown formulation '" + std::string(s) + "'");
}

std::size_t negative_count(Formulation f) { return f == Formulation::AMinusAUnionBMinusB ? 3 : 1; }

prompts::Template generation_template(Formulation f) {
  switch (f) {
    case Formulation::AMinusA: return prompts::Template::GenerateAMinusA;
    case Formulation::AMinusAUnionB: return prompts::Template::GenerateAMinusAUnionB;
    case Formulation::AMinusAUnionBMinusB: return prompts::Template::GenerateAMinusAUnionBMinusB;
  }
  return prompts::Template::GenerateAMinusA;
}

void validate(const NegConstraintItem& item) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::SchemaViolation, "item '" + item.query_id + "': " + why);
  };
  if (item.query_id.empty()) fail("empty query_id");
  if (item.query.find_first_not_of(" \t\r\n") == std::string::npos) fail("empty query");
  if (item.positive_ids.size() != 1) {
    fail("expected 1 positive, got " + std::to_string(item.positive_ids.size()));
  }
  const std::size_t want = negative_count(item.formulation);
  if (item.negative_ids.size() != want) {
    fail(std::string(to_string(item.formulation)) + " expects " + std::to_string(want) + " negatives, got " +
         std::to_string(item.negative_ids.size()));
  }
  const std::set<std::string> neg(item.negative_ids.begin(), item.negative_ids.end());
  if (neg.size() != item.negative_ids.size()) fail("duplicate negative id");
  for (const auto& p : item.positive_ids) {
    if (neg.contains(p)) fail("document " + p + " is both positive and negative");
  }
}

std::vector<NegConstraintItem> read_negconstraint_items(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::vector<NegConstraintItem> items;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    NegConstraintItem item;
    try {
      const json row = json::parse(line);
      item.query_id = row.at("query_id").get<std::string>();
      item.formulation = parse_formulation(row.at("formulation").get<std::string>());
      item.query = row.at("query").get<std::string>();
      item.positive_ids = row.at("positive_ids").get<std::vector<std::string>>();
      item.negative_ids = row.at("negative_ids").get<std::vector<std::string>>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRow, where + e.what(), lineno);
    }
    try {
      validate(item);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaViolation, where + e.what(), lineno);
    }
    if (!seen.insert(item.query_id).second) {
      throw Error(ErrorCode::SchemaViolation, where + "duplicate query_id '" + item.query_id + "'", lineno);
    }
    items.push_back(std::move(item));
  }
  return items;
}

NegConstraintSet load_negconstraint(const std::filesystem::path& items_path,
                                    const std::filesystem::path& corpus_path) {
  NegConstraintSet set{read_negconstraint_items(items_path), read_corpus_jsonl(corpus_path)};
  for (const auto& item : set.items) {
    for (const auto* ids : {&item.positive_ids, &item.negative_ids}) {
      for (const auto& id : *ids) {
        if (!set.corpus.find(id)) {
          throw Error(ErrorCode::SchemaViolation, "item '" + item.query_id + "': document " + id + " is not in the corpus");
        }
      }
    }
  }
  return set;
}

void write_negconstraint_items(const std::filesystem::path& path, const std::vector<NegConstraintItem>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& item : items) {
    const json row = {
        {"query_id", item.query_id},         {"formulation", to_string(item.formulation)},
        {"query", item.query},               {"positive_ids", item.positive_ids},
        {"negative_ids", item.negative_ids},
    };
    out << row.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Qrels derive_qrels(const std::vector<NegConstraintItem>& items) {
  Qrels qrels;
  for (const auto& item : items) {
    for (const auto& id : item.positive_ids) qrels.add(item.query_id, id, 1);
    for (const auto& id : item.negative_ids) qrels.add(item.query_id, id, 0);
  }
  return qrels;
}

std::vector<Query> derive_queries(const std::vector<NegConstraintItem>& items) {
  std::vector<Query> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back({item.query_id, item.query});
  return out;
}

std::string generation_prompt(std::string_view positive_doc, const std::vector<std::string>& negative_docs,
                              Formulation formulation) {
  if (negative_docs.size() != negative_count(formulation)) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(formulation)) + " takes " +
                                                std::to_string(negative_count(formulation)) + " negative documents, got " +
                                                std::to_string(negative_docs.size()));
  }
  std::map<std::string, std::string> values{{"%POSITIVE DOCUMENT%", std::string(positive_doc)}, {"%QUERY%", ""}};
  if (negative_docs.size() == 1) {
    values["%NEGATIVE DOCUMENT%"] = negative_docs.front();
  } else {
    for (std::size_t k = 0; k < negative_docs.size(); ++k) {
      values["%NEGATIVE DOCUMENT " + std::to_string(k + 1) + "%"] = negative_docs[k];
    }
  }
  return prompts::instantiate(generation_template(formulation), values);
}

std::string generate_negconstraint(std::string_view positive_doc, const std::vector<std::string>& negative_docs,
                                   Formulation formulation, LlmClient& llm, const RetryPolicy& retry) {
  const std::string reply = complete_with_retry(llm, generation_prompt(positive_doc, negative_docs, formulation), retry);
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t end = reply.find('\n', pos);
    if (end == std::string::npos) end = reply.size();
    std::string_view line(reply.data() + pos, end - pos);
    auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) return std::string_view{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.rfind("Query:", 0) == 0) line = trim(line.substr(6));
    if (!line.empty()) return std::string(line);
    pos = end + 1;
  }
  throw Error(ErrorCode::EmptyGeneration, "model returned no query text");
}

}  // namespace nsir
