#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nsir/corpus.hpp"

namespace nsir {

/// (query_id, doc_id) -> relevance >= 0.
class Qrels {
 public:
  /// Throws InvalidArgument for a duplicate pair or negative relevance.
  void add(const std::string& qid, const std::string& doc_id, int relevance);
  int relevance(const std::string& qid, const std::string& doc_id) const;
  /// Empty map for unknown queries.
  const std::map<std::string, int>& judgments(const std::string& qid) const;
  std::vector<std::string> query_ids() const;
  std::size_t size() const noexcept { return count_; }

 private:
  std::map<std::string, std::map<std::string, int>> by_query_;
  std::size_t count_ = 0;
};

/// Accepts BEIR TSV ("query-id corpus-id score" header, tab separated) and
/// TREC qrels ("qid iter doc rel", whitespace separated).
/// Throws MissingFile and MalformedRow (detail = line).
Qrels read_qrels(const std::filesystem::path& path);
void write_trec_qrels(const std::filesystem::path& path, const Qrels& qrels);

struct BeirDataset {
  Corpus corpus;
  std::vector<Query> queries;
  Qrels qrels;
};

BeirDataset load_beir(const std::filesystem::path& corpus_path, const std::filesystem::path& queries_path,
                      const std::filesystem::path& qrels_path);

struct RunEntry {
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0.0;
};

/// Ranked documents per query.
using Run = std::map<std::string, std::vector<RunEntry>>;

/// Six whitespace-separated columns per line: qid Q0 doc rank score tag.
/// Each query's rows are ordered by descending score, then ascending rank.
/// Throws MissingFile and MalformedRun (detail = line).
Run read_trec_run(const std::filesystem::path& path);

struct MetricReport {
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

struct MetricOptions {
  /// Drop queries with no relevant judgment instead of scoring them 0.
  bool exclude_no_relevant = false;
};

/// Scored queries are those in the run or the qrels. Gain 2^rel - 1,
/// discount log2(rank + 1), ideal ranking from the qrels.
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k, MetricOptions options = {});

/// Relevance binarized at > 0; AP divides by every relevant judgment.
MetricReport mean_average_precision(const Run& run, const Qrels& qrels, MetricOptions options = {});

/// Per-group means plus both ways of combining groups: micro (mean over all
/// queries) and macro (mean of group means). Queries without a group are
/// left out.
struct GroupedReport {
  std::map<std::string, double> group_mean;
  std::map<std::string, std::size_t> group_size;
  double micro = 0.0;
  double macro = 0.0;
};

GroupedReport group_metric(const MetricReport& report, const std::map<std::string, std::string>& group_of);

}  // namespace nsir
