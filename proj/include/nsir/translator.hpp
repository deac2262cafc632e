#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "nsir/http_util.hpp"

namespace nsir {

/// A text-completion backend. Implementations must be callable from several
/// threads at once.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Throws EndpointError (detail = HTTP status when there is one) or
  /// RateLimited.
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_id() const = 0;
  virtual double temperature() const = 0;
};

struct ChatEndpointOptions {
  std::string base_url;  // requests go to {base_url}/chat/completions
  std::string model = "gpt-4o";
  double temperature = 0.5;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions client. One user message per call;
/// the reply is choices[0].message.content. HTTP 429 maps to RateLimited.
class OpenAiChatClient final : public LlmClient {
 public:
  explicit OpenAiChatClient(ChatEndpointOptions options);
  std::string complete(const std::string& prompt) override;
  std::string model_id() const override { return options_.model; }
  double temperature() const override { return options_.temperature; }

 private:
  ChatEndpointOptions options_;
  HttpEndpoint endpoint_;
  std::string api_key_;
};

/// Stands in when no endpoint is configured: every call is an EndpointError,
/// so only cached translations are usable.
class OfflineLlmClient final : public LlmClient {
 public:
  OfflineLlmClient(std::string model, double temperature)
      : model_(std::move(model)), temperature_(temperature) {}
  std::string complete(const std::string& prompt) override;
  std::string model_id() const override { return model_; }
  double temperature() const override { return temperature_; }

 private:
  std::string model_;
  double temperature_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  /// Injected so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// complete() with exponential backoff on RateLimited; other errors pass
/// straight through. The last RateLimited is rethrown once attempts run out.
std::string complete_with_retry(LlmClient& llm, const std::string& prompt, const RetryPolicy& retry);

enum class TranslationKind { Query, Document };
std::string_view to_string(TranslationKind kind);
/// Throws InvalidArgument for anything but "query" / "document".
TranslationKind parse_translation_kind(std::string_view s);

struct TranslationRecord {
  std::string text_hash;  // hex SHA-256 of the untruncated text
  TranslationKind kind = TranslationKind::Query;
  std::string fol_text;
  std::string raw_response;
  std::string model_id;
  double temperature = 0.0;
  bool truncated = false;
};

std::string translation_text_hash(std::string_view text);

/// Append-only JSONL store of successful translations keyed by
/// (text_hash, kind, model_id); later lines win at load time. An empty path
/// keeps the cache in memory only.
class TranslationCache {
 public:
  TranslationCache() = default;
  /// Loads the file if it exists. Throws MalformedRow (detail = line).
  explicit TranslationCache(std::filesystem::path path);

  std::optional<TranslationRecord> find(std::string_view text_hash, TranslationKind kind,
                                        std::string_view model_id) const;
  /// Appends one line and flushes before updating the in-memory view.
  void put(const TranslationRecord& record);
  std::size_t size() const;
  /// Every record, in key order.
  std::vector<TranslationRecord> records() const;

 private:
  using Key = std::tuple<std::string, TranslationKind, std::string>;
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<Key, TranslationRecord> records_;
};

struct TranslatorOptions {
  std::size_t doc_char_limit = 6000;  // code points
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

struct WarmCacheSummary {
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t cached = 0;
  std::vector<std::string> failures;  // one message per failed text, input order
};

class Translator {
 public:
  Translator(LlmClient& llm, TranslationCache& cache, TranslatorOptions options = {});

  /// Cache hit, or prompt, parse and persist. Throws EndpointError,
  /// RateLimited or ParseFailure; nothing is cached on failure.
  TranslationRecord translate(std::string_view text, TranslationKind kind);
  std::optional<TranslationRecord> cached(std::string_view text, TranslationKind kind) const;

  /// Attempts each distinct text once with bounded concurrency. Counts are
  /// over distinct texts; failures never throw.
  WarmCacheSummary warm_cache(const std::vector<std::string>& texts, TranslationKind kind);

  std::string build_prompt(std::string_view text, TranslationKind kind, bool* truncated = nullptr) const;

 private:
  LlmClient& llm_;
  TranslationCache& cache_;
  TranslatorOptions options_;
};

/// First `limit` code points of a UTF-8 string.
std::string truncate_code_points(std::string_view text, std::size_t limit, bool* truncated);

}  // namespace nsir
