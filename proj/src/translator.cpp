#include "nsir/translator.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <thread>

#include "nsir/digest.hpp"
#include "nsir/error.hpp"
#include "nsir/fol_parser.hpp"
#include "nsir/prompts.hpp"

namespace nsir {

using nlohmann::json;

OpenAiChatClient::OpenAiChatClient(ChatEndpointOptions options)
    : options_(std::move(options)), endpoint_(parse_http_url(options_.base_url)) {
  if (options_.model.empty()) throw Error(ErrorCode::Config, "LLM model name is empty");
  if (!options_.api_key_env.empty()) {
    if (const char* key = std::getenv(options_.api_key_env.c_str())) api_key_ = key;
  }
}

std::string OpenAiChatClient::complete(const std::string& prompt) {
  httplib::Client client(endpoint_.origin);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const json request = {
      {"model", options_.model},
      {"temperature", options_.temperature},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  auto res = client.Post(endpoint_.path("/chat/completions"), headers, request.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::EndpointError, "LLM endpoint unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    throw Error(ErrorCode::RateLimited, "LLM endpoint returned HTTP 429", 429);
  }
  if (res->status != 200) {
    throw Error(ErrorCode::EndpointError, "LLM endpoint returned HTTP " + std::to_string(res->status),
                static_cast<std::size_t>(res->status));
  }
  try {
    const json body = json::parse(res->body);
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::EndpointError, std::string("malformed chat completion: ") + e.what(), 200);
  }
}

std::string OfflineLlmClient::complete(const std::string&) {
  throw Error(ErrorCode::EndpointError, "no LLM endpoint configured and the translation is not cached");
}

std::string complete_with_retry(LlmClient& llm, const std::string& prompt, const RetryPolicy& retry) {
  const int attempts = std::max(1, retry.max_attempts);
  auto backoff = retry.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return llm.complete(prompt);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RateLimited || attempt >= attempts) throw;
    }
    if (retry.sleep) {
      retry.sleep(backoff);
    } else {
      std::this_thread::sleep_for(backoff);
    }
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(std::llround(static_cast<double>(backoff.count()) * retry.multiplier)));
  }
}

std::string_view to_string(TranslationKind kind) {
  return kind == TranslationKind::Query ? "query" : "document";
}

TranslationKind parse_translation_kind(std::string_view s) {
  if (s == "query") return TranslationKind::Query;
  if (s == "document") return TranslationKind::Document;
  throw Error(ErrorCode::InvalidArgument, "unknown translation kind '" + std::string(s) + "'");
}

std::string translation_text_hash(std::string_view text) { return to_hex(sha256(text)); }

namespace {

json to_json(const TranslationRecord& r) {
  return {
      {"text_hash", r.text_hash},     {"kind", to_string(r.kind)},   {"fol_text", r.fol_text},
      {"raw_response", r.raw_response}, {"model_id", r.model_id}, {"temperature", r.temperature},
      {"truncated", r.truncated},
  };
}

TranslationRecord record_from_json(const json& j) {
  TranslationRecord r;
  r.text_hash = j.at("text_hash").get<std::string>();
  r.kind = parse_translation_kind(j.at("kind").get<std::string>());
  r.fol_text = j.at("fol_text").get<std::string>();
  r.raw_response = j.at("raw_response").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.truncated = j.value("truncated", false);
  if (r.fol_text.empty()) throw Error(ErrorCode::InvalidArgument, "empty fol_text");
  return r;
}

}  // namespace

TranslationCache::TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto r = record_from_json(json::parse(line));
      Key key{r.text_hash, r.kind, r.model_id};
      records_.insert_or_assign(std::move(key), std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::MalformedRow,
                  path_.string() + ":" + std::to_string(lineno) + ": bad cache record: " + e.what(), lineno);
    }
  }
}

std::optional<TranslationRecord> TranslationCache::find(std::string_view text_hash, TranslationKind kind,
                                                        std::string_view model_id) const {
  std::lock_guard lock(mutex_);
  auto it = records_.find(Key{std::string(text_hash), kind, std::string(model_id)});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::put(const TranslationRecord& record) {
  std::lock_guard lock(mutex_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << to_json(record).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "cannot append to translation cache " + path_.string());
  }
  records_.insert_or_assign(Key{record.text_hash, record.kind, record.model_id}, record);
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<TranslationRecord> TranslationCache::records() const {
  std::lock_guard lock(mutex_);
  std::vector<TranslationRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, r] : records_) out.push_back(r);
  return out;
}

std::string truncate_code_points(std::string_view text, std::size_t limit, bool* truncated) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size() && count < limit) {
    ++i;
    while (i < text.size() && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) ++i;
    ++count;
  }
  if (truncated) *truncated = i < text.size();
  return std::string(text.substr(0, i));
}

Translator::Translator(LlmClient& llm, TranslationCache& cache, TranslatorOptions options)
    : llm_(llm), cache_(cache), options_(std::move(options)) {}

std::string Translator::build_prompt(std::string_view text, TranslationKind kind, bool* truncated) const {
  if (kind == TranslationKind::Query) {
    if (truncated) *truncated = false;
    return prompts::instantiate(prompts::Template::Nl2FolQuery, {{"%QUERY%", std::string(text)}});
  }
  return prompts::instantiate(prompts::Template::Nl2FolDocument,
                              {{"%DOCUMENT%", truncate_code_points(text, options_.doc_char_limit, truncated)}});
}

std::optional<TranslationRecord> Translator::cached(std::string_view text, TranslationKind kind) const {
  return cache_.find(translation_text_hash(text), kind, llm_.model_id());
}

TranslationRecord Translator::translate(std::string_view text, TranslationKind kind) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "translate of empty text");
  }
  const std::string hash = translation_text_hash(text);
  if (auto hit = cache_.find(hash, kind, llm_.model_id())) return *hit;

  TranslationRecord r;
  r.text_hash = hash;
  r.kind = kind;
  r.model_id = llm_.model_id();
  r.temperature = llm_.temperature();
  const std::string prompt = build_prompt(text, kind, &r.truncated);
  r.raw_response = complete_with_retry(llm_, prompt, options_.retry);

  try {
    r.fol_text = fol::join_formulas(fol::extract_fol_from_llm_response(r.raw_response));
    fol::tokenize_fol(r.fol_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseFailure, std::string("untranslatable response: ") + e.what(), e.detail());
  }
  cache_.put(r);
  return r;
}

WarmCacheSummary Translator::warm_cache(const std::vector<std::string>& texts, TranslationKind kind) {
  std::vector<const std::string*> unique;
  std::set<std::string_view> seen;
  for (const auto& t : texts) {
    if (seen.insert(t).second) unique.push_back(&t);
  }

  enum class Outcome { Ok, Failed, Cached };
  std::vector<Outcome> outcome(unique.size(), Outcome::Failed);
  std::vector<std::string> message(unique.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < unique.size(); k = next++) {
      try {
        if (cached(*unique[k], kind)) {
          outcome[k] = Outcome::Cached;
        } else {
          translate(*unique[k], kind);
          outcome[k] = Outcome::Ok;
        }
      } catch (const std::exception& e) {
        message[k] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(std::max<std::size_t>(1, options_.max_in_flight), unique.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  WarmCacheSummary summary;
  for (std::size_t k = 0; k < unique.size(); ++k) {
    switch (outcome[k]) {
      case Outcome::Ok: ++summary.ok; break;
      case Outcome::Cached: ++summary.cached; break;
      case Outcome::Failed:
        ++summary.failed;
        summary.failures.push_back(message[k]);
        break;
    }
  }
  return summary;
}

}  // namespace nsir
