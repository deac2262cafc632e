#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace nsir {

struct Document {
  std::string id;
  std::string text;
};

/// Documents in file order with unique ids.
class Corpus {
 public:
  /// Throws InvalidArgument on a duplicate id.
  void add(Document doc);
  const Document* find(const std::string& id) const;
  /// Throws UnknownDocument.
  const Document& at(const std::string& id) const;

  const std::vector<Document>& documents() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct Query {
  std::string id;
  std::string text;
};

/// JSONL rows {"_id", "title"?, "text"}; a non-empty title is prepended
/// to the text with one space. Throws MissingFile and MalformedRow
/// (detail = 1-based line).
Corpus read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus);

/// JSONL rows {"_id", "text"}. Same errors as read_corpus_jsonl.
std::vector<Query> read_queries_jsonl(const std::filesystem::path& path);

}  // namespace nsir
