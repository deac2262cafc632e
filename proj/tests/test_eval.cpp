#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "mocks.hpp"
#include "nsir/error.hpp"
#include "nsir/eval.hpp"
#include "nsir/negconstraint.hpp"
#include "oracles.hpp"

using namespace nsir;
using namespace nsir::testing;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const auto dir = fs::temp_directory_path() / "nsir_test_eval";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

nsir::Run ranked(const std::string& qid, const std::vector<std::string>& docs) {
  nsir::Run run;
  for (std::size_t r = 0; r < docs.size(); ++r) run[qid].push_back({docs[r], r + 1, -static_cast<double>(r)});
  return run;
}

}  // namespace

TEST(Ndcg, HandValues) {
  Qrels qrels;
  qrels.add("q", "rel", 1);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"rel", "x"}), qrels, 10).mean, 1.0);
  EXPECT_NEAR(ndcg_at_k(ranked("q", {"x", "rel"}), qrels, 10).mean, 0.6309, 5e-5);
  EXPECT_NEAR(ndcg_at_k(ranked("q", {"x", "rel"}), qrels, 10).mean, 1.0 / std::log2(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(ndcg_at_k(nsir::Run{}, qrels, 10).per_query.at("q"), 0.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked("q", {"x", "rel"}), qrels, 1).mean, 0.0);
}

TEST(Map, HandValues) {
  Qrels qrels;
  qrels.add("q", "a", 1);
  qrels.add("q", "b", 2);
  EXPECT_DOUBLE_EQ(mean_average_precision(ranked("q", {"a", "b", "x"}), qrels).mean, 1.0);
  EXPECT_NEAR(mean_average_precision(ranked("q", {"a", "x", "b"}), qrels).mean, 0.8333, 5e-5);
  EXPECT_NEAR(mean_average_precision(ranked("q", {"a", "x", "b"}), qrels).mean, 5.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(mean_average_precision(ranked("q", {"x", "y"}), qrels).mean, 0.0);
}

TEST(Metrics, NoRelevantQueriesScoreZeroOrAreDropped) {
  Qrels qrels;
  qrels.add("q1", "a", 1);
  qrels.add("q2", "a", 0);
  nsir::Run run = ranked("q1", {"a"});
  run["q2"] = {{"a", 1, 1.0}};
  EXPECT_DOUBLE_EQ(ndcg_at_k(run, qrels, 10).mean, 0.5);
  EXPECT_DOUBLE_EQ(ndcg_at_k(run, qrels, 10, {.exclude_no_relevant = true}).mean, 1.0);
  EXPECT_DOUBLE_EQ(mean_average_precision(run, qrels, {.exclude_no_relevant = true}).mean, 1.0);
}

TEST(MetricsOracle, FixtureAgreesWithBruteForce) {
  const auto f = metric_fixture();
  const auto n = ndcg_at_k(f.run, f.qrels, 10);
  const auto a = mean_average_precision(f.run, f.qrels);
  const auto bn = oracle::brute_ndcg(f.ranked, f.judged, 10);
  const auto ba = oracle::brute_ap(f.ranked, f.judged);
  ASSERT_EQ(n.per_query.size(), 5u);
  for (const auto& [q, v] : bn) EXPECT_NEAR(n.per_query.at(q), v, 1e-9) << q;
  for (const auto& [q, v] : ba) EXPECT_NEAR(a.per_query.at(q), v, 1e-9) << q;
}

TEST(MetricsProperty, BoundedAndMonotoneUnderUpwardSwaps) {
  std::mt19937 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t docs = 2 + rng() % 15;
    Qrels qrels;
    std::vector<std::string> order;
    for (std::size_t d = 0; d < docs; ++d) {
      order.push_back("d" + std::to_string(d));
      if (rng() % 2) qrels.add("q", order.back(), static_cast<int>(rng() % 4));
    }
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t k = 1 + rng() % 12;
    const double n0 = ndcg_at_k(ranked("q", order), qrels, k).mean;
    const double a0 = mean_average_precision(ranked("q", order), qrels).mean;
    EXPECT_GE(n0, 0.0);
    EXPECT_LE(n0, 1.0 + 1e-12);
    EXPECT_GE(a0, 0.0);
    EXPECT_LE(a0, 1.0 + 1e-12);

    // Move a document above one with lower relevance.
    const std::size_t lo = rng() % docs, hi = rng() % docs;
    const std::size_t up = std::min(lo, hi), down = std::max(lo, hi);
    if (qrels.relevance("q", order[down]) <= qrels.relevance("q", order[up])) continue;
    std::swap(order[up], order[down]);
    EXPECT_GE(ndcg_at_k(ranked("q", order), qrels, k).mean, n0 - 1e-12);
    EXPECT_GE(mean_average_precision(ranked("q", order), qrels).mean, a0 - 1e-12);
  }
}

TEST(GroupMetric, MicroAndMacro) {
  MetricReport r;
  r.per_query = {{"a", 1.0}, {"b", 0.0}, {"c", 0.5}, {"z", 0.9}};
  const auto g = group_metric(r, {{"a", "X"}, {"b", "X"}, {"c", "Y"}});
  EXPECT_DOUBLE_EQ(g.group_mean.at("X"), 0.5);
  EXPECT_EQ(g.group_size.at("X"), 2u);
  EXPECT_DOUBLE_EQ(g.micro, 0.5);
  EXPECT_DOUBLE_EQ(g.macro, 0.5);
  const auto h = group_metric(r, {{"a", "X"}, {"b", "Y"}, {"c", "Y"}});
  EXPECT_DOUBLE_EQ(h.micro, 0.5);
  EXPECT_DOUBLE_EQ(h.macro, (1.0 + 0.25) / 2);
}

TEST(Loaders, CorpusQueriesAndQrels) {
  const auto corpus = read_corpus_jsonl(write_temp("c.jsonl", R"({"_id":"d1","title":"","text":"abc"})"
                                                               "\n"
                                                               R"({"_id":7,"title":"T","text":"x"})"
                                                               "\n"));
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus.at("d1").text, "abc");
  EXPECT_EQ(corpus.at("7").text, "T x");
  EXPECT_EQ(code_of([&] { corpus.at("nope"); }), ErrorCode::UnknownDocument);

  try {
    read_corpus_jsonl(write_temp("bad.jsonl", "{\"_id\":\"a\",\"text\":\"t\"}\n{\"text\":\"no id\"}\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    EXPECT_EQ(e.detail(), 2u);
  }
  EXPECT_EQ(code_of([] { read_corpus_jsonl("/nonexistent/corpus.jsonl"); }), ErrorCode::MissingFile);

  const auto beir = read_qrels(write_temp("q.tsv", "query-id\tcorpus-id\tscore\nq1\td1\t2\n"));
  EXPECT_EQ(beir.relevance("q1", "d1"), 2);
  EXPECT_EQ(beir.size(), 1u);
  const auto trec = read_qrels(write_temp("q.trec", "q1 0 d1 1\nq1 0 d2 0\n"));
  EXPECT_EQ(trec.relevance("q1", "d1"), 1);
  EXPECT_EQ(trec.judgments("q1").size(), 2u);
  EXPECT_EQ(code_of([] { read_qrels(write_temp("q.bad", "q1 d1\n")); }), ErrorCode::MalformedRow);

  const auto round = fs::temp_directory_path() / "nsir_test_eval" / "round.qrels";
  write_trec_qrels(round, trec);
  EXPECT_EQ(read_qrels(round).judgments("q1"), trec.judgments("q1"));
}

TEST(Loaders, TrecRun) {
  const auto run = read_trec_run(write_temp("r.txt", "q1 Q0 b 2 0.5 t\nq1 Q0 a 1 0.9 t\nq2 Q0 a 1 0.1 t\n"));
  ASSERT_EQ(run.at("q1").size(), 2u);
  EXPECT_EQ(run.at("q1")[0].doc_id, "a");
  EXPECT_EQ(code_of([] { read_trec_run(write_temp("r2.txt", "q1 Q0 a 1 0.9\n")); }), ErrorCode::MalformedRun);
  EXPECT_EQ(code_of([] { read_trec_run(write_temp("r3.txt", "q1 Q0 a 1 0.9 t\nq1 Q0 a 2 0.8 t\n")); }),
            ErrorCode::MalformedRun);
}

TEST(NegConstraint, SchemaRules) {
  NegConstraintItem item{"q", Formulation::AMinusA, "text", {"p"}, {"n"}};
  EXPECT_NO_THROW(validate(item));
  item.negative_ids = {"n1", "n2"};
  EXPECT_EQ(code_of([&] { validate(item); }), ErrorCode::SchemaViolation);
  item.formulation = Formulation::AMinusAUnionBMinusB;
  item.negative_ids = {"n1", "n2", "n3"};
  EXPECT_NO_THROW(validate(item));
  item.negative_ids = {"n1", "n2", "p"};
  EXPECT_EQ(code_of([&] { validate(item); }), ErrorCode::SchemaViolation);
  EXPECT_EQ(code_of([] { parse_formulation("A-a"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_formulation("A_MINUS_A_UNION_B"), Formulation::AMinusAUnionB);
}

TEST(NegConstraint, RoundTripAndDerivedQrels) {
  const std::vector<NegConstraintItem> items = {
      {"q1", Formulation::AMinusA, "Introduce A but not a.", {"p1"}, {"n1"}},
      {"q2", Formulation::AMinusAUnionBMinusB, "Introduce A and B but not a or b.", {"p2"}, {"n1", "n2", "n3"}}};
  const auto path = fs::temp_directory_path() / "nsir_test_eval" / "items.jsonl";
  write_negconstraint_items(path, items);
  const auto back = read_negconstraint_items(path);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].query_id, items[k].query_id);
    EXPECT_EQ(back[k].formulation, items[k].formulation);
    EXPECT_EQ(back[k].query, items[k].query);
    EXPECT_EQ(back[k].positive_ids, items[k].positive_ids);
    EXPECT_EQ(back[k].negative_ids, items[k].negative_ids);
  }
  const auto qrels = derive_qrels(items);
  EXPECT_EQ(qrels.relevance("q2", "p2"), 1);
  EXPECT_EQ(qrels.judgments("q2").size(), 4u);
  EXPECT_EQ(qrels.judgments("q2").at("n3"), 0);
  EXPECT_EQ(derive_queries(items)[1].text, items[1].query);

  const auto data = fs::path(NSIR_TEST_DATA_DIR) / "flip";
  const auto set = load_negconstraint(data / "items.jsonl", data / "corpus.jsonl");
  EXPECT_EQ(set.items.size(), 1u);
  EXPECT_EQ(set.corpus.size(), 2u);
  EXPECT_EQ(code_of([&] { load_negconstraint(path, data / "corpus.jsonl"); }), ErrorCode::SchemaViolation);
}

TEST(GenerateNegConstraint, ReplaysGinsbergExample) {
  const std::string pos = "Allen Ginsberg wrote Kaddish and other poems.";
  const std::string neg = "Howl is a poem written by Allen Ginsberg in 1954-1955.";
  MockLlm llm([](const std::string&) {
    return std::string("Query: Introduce Allen Ginsberg's works, but do not mention 'Howl'.  \n");
  });
  EXPECT_EQ(generate_negconstraint(pos, {neg}, Formulation::AMinusA, llm),
            "Introduce Allen Ginsberg's works, but do not mention 'Howl'.");
  const std::string prompt = llm.prompts().front();
  EXPECT_NE(prompt.find("Positive document: " + pos + "\n"), std::string::npos);
  EXPECT_NE(prompt.find("Negative document: " + neg + "\n"), std::string::npos);

  EXPECT_EQ(code_of([&] { generate_negconstraint(pos, {neg, neg}, Formulation::AMinusA, llm); }),
            ErrorCode::InvalidArgument);
  MockLlm empty([](const std::string&) { return std::string(" \n\n"); });
  EXPECT_EQ(code_of([&] { generate_negconstraint(pos, {neg}, Formulation::AMinusA, empty); }),
            ErrorCode::EmptyGeneration);
}
