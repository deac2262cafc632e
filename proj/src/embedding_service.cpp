#include "nsir/embedding_service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <json.hpp>
#include <optional>
#include <thread>

#include "nsir/error.hpp"

namespace nsir {

using nlohmann::json;

EmbeddingServiceClient::EmbeddingServiceClient(EmbeddingServiceOptions options)
    : options_(std::move(options)), endpoint_(parse_http_url(options_.url)) {
  if (options_.batch_size == 0 || options_.max_in_flight == 0) {
    throw Error(ErrorCode::Config, "batch_size and max_in_flight must be positive");
  }
}

std::size_t EmbeddingServiceClient::dim() const {
  std::lock_guard lock(dim_mutex_);
  return dim_;
}

void EmbeddingServiceClient::check_dim(std::size_t d) {
  std::lock_guard lock(dim_mutex_);
  if (dim_ == 0) dim_ = d;
  if (d != dim_) {
    throw Error(ErrorCode::ProviderUnavailable,
                "service switched dimension from " + std::to_string(dim_) + " to " + std::to_string(d));
  }
}

EncodedText EmbeddingServiceClient::encode(std::string_view text, Side side) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "encode of empty text");
  return std::move(post_batch({std::string(text)}, side).front());
}

std::vector<EncodedText> EmbeddingServiceClient::post_batch(const std::vector<std::string>& texts,
                                                            Side side) {
  httplib::Client client(endpoint_.origin);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);

  const json request = {{"texts", texts}, {"side", to_string(side)}};
  auto res = client.Post(endpoint_.path("/embed"), request.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable,
                "embedding service unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::ProviderUnavailable,
                "embedding service returned HTTP " + std::to_string(res->status),
                static_cast<std::size_t>(res->status));
  }

  std::vector<EncodedText> out;
  try {
    const json body = json::parse(res->body);
    const auto d = body.at("dim").get<std::size_t>();
    if (d == 0) throw Error(ErrorCode::ProviderUnavailable, "service reported dim 0");
    check_dim(d);
    const auto& items = body.at("items");
    if (!items.is_array() || items.size() != texts.size()) {
      throw Error(ErrorCode::ProviderUnavailable, "item count does not match request");
    }
    out.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto& item = items[i];
      auto cls = item.at("cls").get<Vector>();
      auto tokens = item.at("tokens").get<std::vector<std::string>>();
      auto rows = item.at("vectors").get<std::vector<Vector>>();
      if (cls.size() != d) throw Error(ErrorCode::ProviderUnavailable, "cls dimension mismatch");
      for (const auto& r : rows) {
        if (r.size() != d) throw Error(ErrorCode::ProviderUnavailable, "vector dimension mismatch");
      }
      Matrix vectors = rows.empty() ? Matrix(0, d) : Matrix::from_rows(rows);
      out.push_back(pool_subwords(texts[i], side, std::move(cls), tokens, vectors));
      validate(out.back());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProviderUnavailable, std::string("malformed service response: ") + e.what());
  }
  return out;
}

std::vector<EncodedText> EmbeddingServiceClient::batch_encode(const std::vector<std::string>& texts,
                                                              Side side) {
  if (texts.empty()) throw Error(ErrorCode::InvalidArgument, "batch_encode of an empty list");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw Error(ErrorCode::InvalidArgument, "empty text at index " + std::to_string(i), i);
  }

  const std::size_t n_chunks = (texts.size() + options_.batch_size - 1) / options_.batch_size;
  std::vector<std::vector<EncodedText>> results(n_chunks);
  std::vector<std::optional<Error>> errors(n_chunks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      const std::size_t lo = c * options_.batch_size;
      const std::size_t hi = std::min(texts.size(), lo + options_.batch_size);
      const std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(lo),
                                           texts.begin() + static_cast<std::ptrdiff_t>(hi));
      try {
        results[c] = post_batch(chunk, side);
      } catch (const Error& e) {
        errors[c] = Error(e.code(), "batch starting at item " + std::to_string(lo) + ": " + e.what(), lo);
      } catch (const std::exception& e) {
        errors[c] = Error(ErrorCode::ProviderUnavailable, e.what(), lo);
      }
    }
  };

  const std::size_t n_threads = std::min(options_.max_in_flight, n_chunks);
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (auto& e : errors) {
    if (e) throw *e;
  }
  std::vector<EncodedText> out;
  out.reserve(texts.size());
  for (auto& chunk : results) {
    for (auto& e : chunk) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace nsir
