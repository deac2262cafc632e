#pragma once

#include <cstddef>
#include <mutex>
#include <string>

#include "nsir/embedding.hpp"
#include "nsir/http_util.hpp"

namespace nsir {

struct EmbeddingServiceOptions {
  std::string url;  // base URL; requests go to {url}/embed
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int timeout_seconds = 120;
};

/// Client for the embedding service:
///
///   POST /embed  {"texts": [...], "side": "nl" | "fol"}
///   200          {"dim": d, "items": [{"cls": [...], "tokens": [...],
///                                      "vectors": [[...], ...]}, ...]}
///
/// Subword rows from the service are mean-pooled into words with
/// pool_subwords(). Non-200 responses, transport failures and schema
/// mismatches raise ProviderUnavailable.
class EmbeddingServiceClient final : public EmbeddingProvider {
 public:
  explicit EmbeddingServiceClient(EmbeddingServiceOptions options);

  EncodedText encode(std::string_view text, Side side) override;

  /// Splits into batch_size requests with at most max_in_flight outstanding;
  /// results come back in input order.
  std::vector<EncodedText> batch_encode(const std::vector<std::string>& texts, Side side) override;

  /// 0 until the first successful response fixes the session dimension.
  std::size_t dim() const;

 private:
  std::vector<EncodedText> post_batch(const std::vector<std::string>& texts, Side side);
  void check_dim(std::size_t d);

  EmbeddingServiceOptions options_;
  HttpEndpoint endpoint_;
  mutable std::mutex dim_mutex_;
  std::size_t dim_ = 0;
};

}  // namespace nsir
