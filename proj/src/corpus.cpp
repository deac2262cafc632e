#include "nsir/corpus.hpp"

#include <fstream>
#include <json.hpp>

#include "nsir/error.hpp"

namespace nsir {

using nlohmann::json;

void Corpus::add(Document doc) {
  if (by_id_.contains(doc.id)) throw Error(ErrorCode::InvalidArgument, "duplicate document id '" + doc.id + "'");
  by_id_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

const Document* Corpus::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &docs_[it->second];
}

const Document& Corpus::at(const std::string& id) const {
  if (const Document* d = find(id)) return *d;
  throw Error(ErrorCode::UnknownDocument, "no document with id '" + id + "'");
}

namespace {

template <typename RowFn>
void for_each_jsonl_row(const std::filesystem::path& path, RowFn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno) + ": " + why, lineno);
    };
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    if (!row.is_object()) fail("row is not an object");
    auto field = [&](const char* key, bool required) -> std::string {
      auto it = row.find(key);
      if (it == row.end() || it->is_null()) {
        if (required) fail(std::string("missing ") + key);
        return {};
      }
      if (it->is_number_integer()) return std::to_string(it->get<long long>());
      if (!it->is_string()) fail(std::string(key) + " is not a string");
      return it->get<std::string>();
    };
    try {
      fn(field, fail);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedRow) throw;
      fail(e.what());
    }
  }
}

}  // namespace

Corpus read_corpus_jsonl(const std::filesystem::path& path) {
  Corpus corpus;
  for_each_jsonl_row(path, [&](auto&& field, auto&& fail) {
    std::string id = field("_id", true);
    if (id.empty()) fail("empty _id");
    const std::string title = field("title", false);
    std::string text = field("text", true);
    if (!title.empty()) text = text.empty() ? title : title + " " + text;
    corpus.add({std::move(id), std::move(text)});
  });
  return corpus;
}

void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& d : corpus.documents()) out << json{{"_id", d.id}, {"text", d.text}}.dump() << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Query> read_queries_jsonl(const std::filesystem::path& path) {
  std::vector<Query> queries;
  std::unordered_map<std::string, bool> seen;
  for_each_jsonl_row(path, [&](auto&& field, auto&& fail) {
    std::string id = field("_id", true);
    if (id.empty()) fail("empty _id");
    if (seen[id]) fail("duplicate query id '" + id + "'");
    seen[id] = true;
    queries.push_back({std::move(id), field("text", true)});
  });
  return queries;
}

}  // namespace nsir
