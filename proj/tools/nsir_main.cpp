#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <set>
#include <sstream>

#include "nsir/corpus.hpp"
#include "nsir/embedding_service.hpp"
#include "nsir/embedding_store.hpp"
#include "nsir/error.hpp"
#include "nsir/eval.hpp"
#include "nsir/negconstraint.hpp"
#include "nsir/pipeline.hpp"
#include "nsir/run_config.hpp"
#include "nsir/translator.hpp"

namespace {

using nlohmann::json;
using namespace nsir;
namespace fs = std::filesystem;

// Raw flag values; only flags that were actually given override the config.
struct CommonFlags {
  std::string config;
  std::size_t k = 0;
  std::string provider, store, llm_base, llm_model, cache, weights, run_tag;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  double d_k = 0.0;
  bool no_normalize_fused = false;
  bool include_cls = false;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> setters;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "key = value config file");
  auto bind = [&](CLI::Option* opt, std::function<void(RunConfig&)> set) { f.setters.emplace_back(opt, std::move(set)); };
  bind(app->add_option("--k", f.k, "first-stage depth (default 100)"), [&f](RunConfig& c) { c.k = f.k; });
  bind(app->add_option("--provider", f.provider, "'store' or embedding service URL"),
       [&f](RunConfig& c) { c.provider = f.provider; });
  bind(app->add_option("--store", f.store, "embedding store file"), [&f](RunConfig& c) { c.store = f.store; });
  bind(app->add_option("--llm-base", f.llm_base, "chat-completions base URL"),
       [&f](RunConfig& c) { c.llm_base = f.llm_base; });
  bind(app->add_option("--llm-model", f.llm_model, "LLM model name"), [&f](RunConfig& c) { c.llm_model = f.llm_model; });
  bind(app->add_option("--cache", f.cache, "translation cache (JSONL)"), [&f](RunConfig& c) { c.cache = f.cache; });
  bind(app->add_option("--weights", f.weights, "score weights w1,w2"),
       [&f](RunConfig& c) { std::tie(c.w1, c.w2) = parse_weights(f.weights); });
  bind(app->add_option("--seed", f.seed, "reserved"), [&f](RunConfig& c) { c.seed = f.seed; });
  bind(app->add_option("--threads", f.threads, "worker threads"), [&f](RunConfig& c) { c.threads = f.threads; });
  bind(app->add_option("--d-k", f.d_k, "attention scale dimension"), [&f](RunConfig& c) { c.d_k = f.d_k; });
  bind(app->add_option("--run-tag", f.run_tag, "run file tag"), [&f](RunConfig& c) { c.run_tag = f.run_tag; });
  bind(app->add_flag("--no-normalize-fused", f.no_normalize_fused, "skip L2 normalization before scoring"),
       [](RunConfig& c) { c.normalize_fused = false; });
  bind(app->add_flag("--include-cls", f.include_cls, "prepend the CLS row to H"),
       [](RunConfig& c) { c.include_cls = true; });
}

RunConfig effective_config(const CommonFlags& f) {
  RunConfig c;
  if (!f.config.empty()) apply_config_file(c, f.config);
  for (const auto& [opt, set] : f.setters) {
    if (opt->count() > 0) set(c);
  }
  validate(c);
  return c;
}

json config_json(const RunConfig& c) {
  json out = json::object();
  for (const auto& [k, v] : echo(c)) out[k] = v;
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& c) {
  if (c.uses_store()) {
    if (c.store.empty()) throw Error(ErrorCode::Config, "provider 'store' needs --store");
    return std::make_unique<EmbeddingStore>(c.store);
  }
  return std::make_unique<EmbeddingServiceClient>(EmbeddingServiceOptions{c.provider});
}

std::unique_ptr<LlmClient> make_llm(const RunConfig& c) {
  if (c.llm_base.empty()) return std::make_unique<OfflineLlmClient>(c.llm_model, c.temperature);
  ChatEndpointOptions o;
  o.base_url = c.llm_base;
  o.model = c.llm_model;
  o.temperature = c.temperature;
  return std::make_unique<OpenAiChatClient>(o);
}

TranslatorOptions translator_options(const RunConfig& c) {
  TranslatorOptions o;
  o.doc_char_limit = c.doc_char_limit;
  return o;
}

// Writes to `path`, or stdout for "" / "-".
void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

json matrix_json(const std::string& name, const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                 const std::function<double(std::size_t, std::size_t)>& at) {
  json values = json::array();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < cols.size(); ++c) row.push_back(at(r, c));
    values.push_back(std::move(row));
  }
  return {{"matrix", name}, {"rows", rows}, {"cols", cols}, {"values", std::move(values)}};
}

void dump_side(const fs::path& dir, const std::string& prefix, const SideAnalysis& s) {
  const std::vector<std::pair<std::string, json>> files = {
      {"cost", matrix_json("cost", s.nl_labels, s.fol_labels, [&](auto i, auto j) { return s.cost(i, j); })},
      {"plan", matrix_json("plan", s.nl_labels, s.fol_labels, [&](auto i, auto j) { return s.plan.plan(i, j); })},
      {"sigma", matrix_json("sigma", s.fol_labels, s.nl_labels,
                            [&](auto j, auto i) { return static_cast<double>(s.sigma(j, i)); })},
      {"attention", matrix_json("attention", s.fol_labels, s.nl_labels,
                                [&](auto j, auto i) { return s.attention.weights(j, i); })},
  };
  for (const auto& [name, body] : files) write_output((dir / (prefix + "_" + name + ".json")).string(), body.dump(2) + "\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Neuro-symbolic reranking: retrieval, FOL translation, alignment and evaluation"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* show = app.add_subcommand("show-config", "print the effective configuration");
  add_common(show, flags);

  std::string corpus_path, queries_path, out_path, details_path;
  auto* embed = app.add_subcommand("embed", "encode corpus, queries and cached FOL texts into a store");
  add_common(embed, flags);
  embed->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  embed->add_option("--queries", queries_path, "queries JSONL");
  embed->add_option("--out", out_path, "store file to write")->required();

  bool first_stage_only = false;
  auto* translate = app.add_subcommand("translate", "warm the translation cache");
  add_common(translate, flags);
  translate->add_option("--queries", queries_path, "queries JSONL");
  translate->add_option("--corpus", corpus_path, "corpus JSONL");
  translate->add_flag("--first-stage", first_stage_only, "only documents in some query's top K");

  auto* rerank = app.add_subcommand("rerank", "first stage plus rerank; writes a TREC run");
  add_common(rerank, flags);
  rerank->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  rerank->add_option("--queries", queries_path, "queries JSONL")->required();
  rerank->add_option("--out", out_path, "run file (default stdout)");
  rerank->add_option("--details", details_path, "per-document score breakdown (JSON)");

  std::string run_path, qrels_path, items_path;
  std::size_t cutoff = 10;
  bool exclude_no_relevant = false;
  auto* eval = app.add_subcommand("eval", "nDCG@k and MAP for a run file");
  add_common(eval, flags);
  eval->add_option("--run", run_path, "TREC run file")->required();
  eval->add_option("--qrels", qrels_path, "qrels (BEIR TSV or TREC)");
  eval->add_option("--items", items_path, "NegConstraint items; qrels and formulation groups derive from them");
  eval->add_option("--cutoff", cutoff, "nDCG cutoff (default 10)");
  eval->add_option("--out", out_path, "JSON report");
  eval->add_flag("--exclude-no-relevant", exclude_no_relevant, "skip queries without relevant judgments");

  std::string query_text, query_id, doc_id;
  auto* dump = app.add_subcommand("dump-alignment", "export cost, plan, sigma and attention matrices");
  add_common(dump, flags);
  dump->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  dump->add_option("--query", query_text, "query text");
  dump->add_option("--queries", queries_path, "queries JSONL (with --query-id)");
  dump->add_option("--query-id", query_id, "query id");
  dump->add_option("--doc-id", doc_id, "document id")->required();
  dump->add_option("--out", out_path, "output directory")->required();

  std::string positive_id, formulation_name;
  std::vector<std::string> negative_ids;
  auto* generate = app.add_subcommand("generate", "generate a negative-constraint query");
  add_common(generate, flags);
  generate->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  generate->add_option("--positive", positive_id, "positive document id")->required();
  generate->add_option("--negative", negative_ids, "negative document id (repeatable)")->required();
  generate->add_option("--formulation", formulation_name, "A_MINUS_A | A_MINUS_A_UNION_B | A_MINUS_A_UNION_B_MINUS_B")
      ->required();
  generate->add_option("--query-id", query_id, "id for the appended item");
  generate->add_option("--out", out_path, "items JSONL to append to");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const RunConfig config = effective_config(flags);

  if (show->parsed()) {
    std::cout << echo_text(config);
    return 0;
  }

  if (embed->parsed()) {
    if (config.uses_store()) throw Error(ErrorCode::Config, "embed needs --provider <embedding service URL>");
    EmbeddingServiceClient client(EmbeddingServiceOptions{config.provider});
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    std::vector<std::string> nl_texts;
    for (const auto& d : corpus.documents()) nl_texts.push_back(d.text);
    if (!queries_path.empty()) {
      for (const auto& q : read_queries_jsonl(queries_path)) nl_texts.push_back(q.text);
    }
    std::vector<std::string> fol_texts;
    if (!config.cache.empty()) {
      for (const auto& r : TranslationCache(config.cache).records()) fol_texts.push_back(r.fol_text);
    }
    EmbeddingStoreWriter writer;
    for (auto [texts, side] : {std::pair{&nl_texts, Side::NL}, std::pair{&fol_texts, Side::FOL}}) {
      if (texts->empty()) continue;
      for (const auto& e : client.batch_encode(*texts, side)) writer.add(e);
    }
    writer.write(out_path);
    std::cerr << "wrote " << writer.size() << " records to " << out_path << "\n";
    return 0;
  }

  if (translate->parsed()) {
    if (config.llm_base.empty()) throw Error(ErrorCode::Config, "translate needs --llm-base");
    if (config.cache.empty()) throw Error(ErrorCode::Config, "translate needs --cache");
    auto llm = make_llm(config);
    TranslationCache cache(config.cache);
    Translator translator(*llm, cache, translator_options(config));
    json summary = json::object();
    std::vector<Query> queries;
    if (!queries_path.empty()) queries = read_queries_jsonl(queries_path);
    if (!queries.empty()) {
      std::vector<std::string> texts;
      for (const auto& q : queries) texts.push_back(q.text);
      const auto s = translator.warm_cache(texts, TranslationKind::Query);
      summary["query"] = {{"ok", s.ok}, {"failed", s.failed}, {"cached", s.cached}, {"failures", s.failures}};
    }
    if (!corpus_path.empty()) {
      const Corpus corpus = read_corpus_jsonl(corpus_path);
      std::vector<std::string> texts;
      if (first_stage_only) {
        auto provider = make_provider(config);
        const CorpusIndex index = CorpusIndex::build(corpus, *provider);
        std::set<std::string> ids;
        for (const auto& q : queries) {
          for (const auto& c : first_stage_retrieve(provider->encode(q.text, Side::NL).cls, index, config.k)) {
            ids.insert(c.doc_id);
          }
        }
        for (const auto& d : corpus.documents()) {
          if (ids.contains(d.id)) texts.push_back(d.text);
        }
      } else {
        for (const auto& d : corpus.documents()) texts.push_back(d.text);
      }
      const auto s = translator.warm_cache(texts, TranslationKind::Document);
      summary["document"] = {{"ok", s.ok}, {"failed", s.failed}, {"cached", s.cached}, {"failures", s.failures}};
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
  }

  if (rerank->parsed()) {
    std::cerr << echo_text(config);
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    const auto queries = read_queries_jsonl(queries_path);
    auto provider = make_provider(config);
    auto llm = make_llm(config);
    TranslationCache cache(config.cache);
    Translator translator(*llm, cache, translator_options(config));
    Reranker reranker(*provider, translator, corpus, {config.scoring(), config.threads});
    std::vector<RerankResult> details;
    std::vector<RunRow> rows;
    if (!queries.empty()) {
      const CorpusIndex index = CorpusIndex::build(corpus, *provider);
      rows = run_query_set(queries, *provider, index, reranker, config.k, &details);
    }
    std::ostringstream run_text;
    write_trec_run(run_text, rows, config.run_tag);
    write_output(out_path, run_text.str());

    if (!details_path.empty()) {
      json report = {{"config", config_json(config)}, {"queries", json::array()}};
      for (std::size_t q = 0; q < details.size(); ++q) {
        json rows_json = json::array();
        for (const auto& r : details[q].rows) {
          rows_json.push_back({{"doc_id", r.doc_id},
                               {"first_stage", r.first_stage},
                               {"score1", r.score1 ? json(*r.score1) : json(nullptr)},
                               {"score2", r.score2 ? json(*r.score2) : json(nullptr)},
                               {"combined", r.combined},
                               {"fallback_used", r.fallback_used},
                               {"fallback_reason", r.fallback_reason}});
        }
        report["queries"].push_back({{"query_id", queries[q].id},
                                     {"query_failure", details[q].query_failure ? json(*details[q].query_failure) : json(nullptr)},
                                     {"rows", std::move(rows_json)}});
      }
      write_output(details_path, report.dump(2) + "\n");
    }
    std::size_t fallbacks = 0;
    for (const auto& d : details) {
      for (const auto& r : d.rows) fallbacks += r.fallback_used ? 1 : 0;
    }
    std::cerr << "ranked " << rows.size() << " rows for " << queries.size() << " queries (" << fallbacks
              << " fallbacks)\n";
    return 0;
  }

  if (eval->parsed()) {
    if (qrels_path.empty() == items_path.empty()) throw Error(ErrorCode::InvalidArgument, "give exactly one of --qrels, --items");
    if (cutoff == 0) throw Error(ErrorCode::InvalidArgument, "--cutoff must be at least 1");
    const Run run_file = read_trec_run(run_path);
    Qrels qrels;
    std::map<std::string, std::string> group_of;
    if (!qrels_path.empty()) {
      qrels = read_qrels(qrels_path);
    } else {
      const auto items = read_negconstraint_items(items_path);
      for (const auto& item : items) group_of[item.query_id] = std::string(to_string(item.formulation));
      qrels = derive_qrels(items);
    }
    const MetricOptions mo{exclude_no_relevant};
    const MetricReport ndcg = ndcg_at_k(run_file, qrels, cutoff, mo);
    const MetricReport map = mean_average_precision(run_file, qrels, mo);

    const std::string ndcg_name = "ndcg@" + std::to_string(cutoff);
    std::printf("%-24s %12s %12s\n", "query", ndcg_name.c_str(), "ap");
    json per_query = json::object();
    for (const auto& [qid, v] : ndcg.per_query) {
      const double ap = map.per_query.at(qid);
      std::printf("%-24s %12.4f %12.4f\n", qid.c_str(), v, ap);
      per_query[qid] = {{ndcg_name, v}, {"ap", ap}};
    }
    std::printf("%-24s %12.4f %12.4f\n", "mean", ndcg.mean, map.mean);

    json report = {{"config", config_json(config)},
                   {"cutoff", cutoff},
                   {"queries", ndcg.per_query.size()},
                   {"mean", {{ndcg_name, ndcg.mean}, {"map", map.mean}}},
                   {"per_query", std::move(per_query)}};
    if (!group_of.empty()) {
      const auto gn = group_metric(ndcg, group_of);
      const auto gm = group_metric(map, group_of);
      json groups = json::object();
      for (const auto& [g, v] : gn.group_mean) {
        std::printf("%-24s %12.4f %12.4f\n", g.c_str(), v, gm.group_mean.at(g));
        groups[g] = {{ndcg_name, v}, {"map", gm.group_mean.at(g)}, {"queries", gn.group_size.at(g)}};
      }
      std::printf("%-24s %12.4f %12.4f\n", "total (micro)", gn.micro, gm.micro);
      std::printf("%-24s %12.4f %12.4f\n", "total (macro)", gn.macro, gm.macro);
      report["formulations"] = std::move(groups);
      report["total"] = {{"micro", {{ndcg_name, gn.micro}, {"map", gm.micro}}},
                         {"macro", {{ndcg_name, gn.macro}, {"map", gm.macro}}}};
    }
    if (!out_path.empty()) write_output(out_path, report.dump(2) + "\n");
    return 0;
  }

  if (dump->parsed()) {
    if (query_text.empty() == query_id.empty()) throw Error(ErrorCode::InvalidArgument, "give exactly one of --query, --query-id");
    if (!query_id.empty()) {
      if (queries_path.empty()) throw Error(ErrorCode::InvalidArgument, "--query-id needs --queries");
      bool found = false;
      for (const auto& q : read_queries_jsonl(queries_path)) {
        if (q.id == query_id) {
          query_text = q.text;
          found = true;
        }
      }
      if (!found) throw Error(ErrorCode::UnknownDocument, "no query with id '" + query_id + "'");
    }
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    corpus.at(doc_id);
    auto provider = make_provider(config);
    auto llm = make_llm(config);
    TranslationCache cache(config.cache);
    Translator translator(*llm, cache, translator_options(config));
    Reranker reranker(*provider, translator, corpus, {config.scoring(), config.threads});
    const SideAnalysis q = reranker.analyze_query(query_text);
    const SideAnalysis d = reranker.analyze_document(doc_id);
    fs::create_directories(out_path);
    dump_side(out_path, "query", q);
    dump_side(out_path, "doc", d);
    const json summary = {{"config", config_json(config)},
                          {"query", query_text},
                          {"doc_id", doc_id},
                          {"score1", score1(q.fused, d.fused)},
                          {"score2", score2(q.pooled, d.pooled)}};
    write_output((fs::path(out_path) / "summary.json").string(), summary.dump(2) + "\n");
    return 0;
  }

  if (generate->parsed()) {
    if (config.llm_base.empty()) throw Error(ErrorCode::Config, "generate needs --llm-base");
    const Formulation formulation = parse_formulation(formulation_name);
    const Corpus corpus = read_corpus_jsonl(corpus_path);
    std::vector<std::string> negatives;
    for (const auto& id : negative_ids) negatives.push_back(corpus.at(id).text);
    auto llm = make_llm(config);
    const std::string query = generate_negconstraint(corpus.at(positive_id).text, negatives, formulation, *llm);
    std::cout << query << "\n";
    if (!out_path.empty()) {
      NegConstraintItem item{query_id.empty() ? positive_id : query_id, formulation, query, {positive_id}, negative_ids};
      validate(item);
      std::ofstream out(out_path, std::ios::app | std::ios::binary);
      out << json{{"query_id", item.query_id},         {"formulation", to_string(item.formulation)},
                  {"query", item.query},               {"positive_ids", item.positive_ids},
                  {"negative_ids", item.negative_ids}}
                 .dump()
          << '\n';
      if (!out) throw Error(ErrorCode::Io, "cannot append to " + out_path);
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const nsir::Error& e) {
    std::cerr << "nsir: " << e.what() << "\n";
    return nsir::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "nsir: " << e.what() << "\n";
    return 2;
  }
}
