#include "nsir/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nsir/error.hpp"

namespace nsir {

void Qrels::add(const std::string& qid, const std::string& doc_id, int relevance) {
  if (relevance < 0) throw Error(ErrorCode::InvalidArgument, "negative relevance for " + qid + "/" + doc_id);
  if (!by_query_[qid].emplace(doc_id, relevance).second) {
    throw Error(ErrorCode::InvalidArgument, "duplicate judgment for " + qid + "/" + doc_id);
  }
  ++count_;
}

int Qrels::relevance(const std::string& qid, const std::string& doc_id) const {
  const auto& j = judgments(qid);
  auto it = j.find(doc_id);
  return it == j.end() ? 0 : it->second;
}

const std::map<std::string, int>& Qrels::judgments(const std::string& qid) const {
  static const std::map<std::string, int> kEmpty;
  auto it = by_query_.find(qid);
  return it == by_query_.end() ? kEmpty : it->second;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [qid, j] : by_query_) out.push_back(qid);
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == '\t') {
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, '\t')) out.push_back(field);
  } else {
    std::istringstream in(line);
    for (std::string field; in >> field;) out.push_back(field);
  }
  return out;
}

bool parse_int(const std::string& s, int& out) {
  std::size_t used = 0;
  try {
    out = std::stoi(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

}  // namespace

Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  Qrels qrels;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::MalformedRow, path.string() + ":" + std::to_string(lineno) + ": " + why, lineno);
    };
    if (lineno == 1 && line.rfind("query-id", 0) == 0) continue;
    auto fields = split_fields(line, line.find('\t') != std::string::npos ? '\t' : ' ');
    if (fields.size() == 3) {
      fields.insert(fields.begin() + 1, "0");
    } else if (fields.size() != 4) {
      fail("expected 3 (BEIR) or 4 (TREC) columns, got " + std::to_string(fields.size()));
    }
    int rel = 0;
    if (!parse_int(fields[3], rel)) fail("relevance '" + fields[3] + "' is not an integer");
    if (fields[0].empty() || fields[2].empty()) fail("empty id");
    try {
      qrels.add(fields[0], fields[2], rel);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  return qrels;
}

void write_trec_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& qid : qrels.query_ids()) {
    for (const auto& [doc, rel] : qrels.judgments(qid)) out << qid << " 0 " << doc << ' ' << rel << '\n';
  }
}

BeirDataset load_beir(const std::filesystem::path& corpus_path, const std::filesystem::path& queries_path,
                      const std::filesystem::path& qrels_path) {
  return {read_corpus_jsonl(corpus_path), read_queries_jsonl(queries_path), read_qrels(qrels_path)};
}

Run read_trec_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  Run run;
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::MalformedRun, path.string() + ":" + std::to_string(lineno) + ": " + why, lineno);
    };
    const auto f = split_fields(line, ' ');
    if (f.size() != 6) fail("expected 6 columns, got " + std::to_string(f.size()));
    RunEntry e;
    e.doc_id = f[2];
    int rank = 0;
    if (!parse_int(f[3], rank) || rank < 1) fail("rank '" + f[3] + "' is not a positive integer");
    e.rank = static_cast<std::size_t>(rank);
    std::size_t used = 0;
    try {
      e.score = std::stod(f[4], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != f[4].size() || !std::isfinite(e.score)) fail("score '" + f[4] + "' is not a finite number");
    if (!seen[f[0]].insert(e.doc_id).second) fail("document " + e.doc_id + " listed twice for query " + f[0]);
    run[f[0]].push_back(std::move(e));
  }
  for (auto& [qid, entries] : run) {
    std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.rank < b.rank;
    });
  }
  return run;
}

namespace {

std::set<std::string> scored_queries(const Run& run, const Qrels& qrels) {
  std::set<std::string> out;
  for (const auto& [qid, entries] : run) out.insert(qid);
  for (const auto& qid : qrels.query_ids()) out.insert(qid);
  return out;
}

bool has_relevant(const Qrels& qrels, const std::string& qid) {
  const auto& j = qrels.judgments(qid);
  return std::any_of(j.begin(), j.end(), [](const auto& kv) { return kv.second > 0; });
}

template <typename PerQuery>
MetricReport collect(const Run& run, const Qrels& qrels, MetricOptions options, PerQuery&& per_query) {
  static const std::vector<RunEntry> kNoEntries;
  MetricReport report;
  for (const auto& qid : scored_queries(run, qrels)) {
    if (options.exclude_no_relevant && !has_relevant(qrels, qid)) continue;
    auto it = run.find(qid);
    report.per_query[qid] = per_query(qid, it == run.end() ? kNoEntries : it->second);
  }
  double total = 0.0;
  for (const auto& [qid, v] : report.per_query) total += v;
  if (!report.per_query.empty()) report.mean = total / static_cast<double>(report.per_query.size());
  return report;
}

double gain(int rel) { return std::exp2(static_cast<double>(rel)) - 1.0; }

}  // namespace

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, std::size_t k, MetricOptions options) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "nDCG cutoff must be at least 1");
  return collect(run, qrels, options, [&](const std::string& qid, const std::vector<RunEntry>& ranked) {
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ranked.size()); ++r) {
      dcg += gain(qrels.relevance(qid, ranked[r].doc_id)) / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [doc, rel] : qrels.judgments(qid)) {
      if (rel > 0) ideal.push_back(rel);
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) {
      idcg += gain(ideal[r]) / std::log2(static_cast<double>(r) + 2.0);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
  });
}

MetricReport mean_average_precision(const Run& run, const Qrels& qrels, MetricOptions options) {
  return collect(run, qrels, options, [&](const std::string& qid, const std::vector<RunEntry>& ranked) {
    const auto& j = qrels.judgments(qid);
    const auto total_relevant = std::count_if(j.begin(), j.end(), [](const auto& kv) { return kv.second > 0; });
    if (total_relevant == 0) return 0.0;
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      if (qrels.relevance(qid, ranked[r].doc_id) > 0) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    return sum / static_cast<double>(total_relevant);
  });
}

GroupedReport group_metric(const MetricReport& report, const std::map<std::string, std::string>& group_of) {
  GroupedReport out;
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [qid, value] : report.per_query) {
    auto g = group_of.find(qid);
    if (g == group_of.end()) continue;
    out.group_mean[g->second] += value;
    ++out.group_size[g->second];
    total += value;
    ++n;
  }
  double macro = 0.0;
  for (auto& [group, sum] : out.group_mean) {
    sum /= static_cast<double>(out.group_size[group]);
    macro += sum;
  }
  if (n > 0) out.micro = total / static_cast<double>(n);
  if (!out.group_mean.empty()) out.macro = macro / static_cast<double>(out.group_mean.size());
  return out;
}

}  // namespace nsir
