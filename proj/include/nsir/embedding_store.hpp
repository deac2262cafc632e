#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>

#include "nsir/embedding.hpp"

namespace nsir {

/// Binary embedding store, little-endian:
///
///   "NSIR" | version u32 = 1 | dim u32 | count u64
///   per record: hash[32] | token_count u32
///               | token_count x (len u16, UTF-8 bytes)
///               | cls dim x f32 | token_count x dim x f32 (row-major)
///
/// The hash is text_key(text, side). Values are stored as f32 and widened
/// to double on load.
inline constexpr std::uint32_t kStoreVersion = 1;

/// Read-only after construction; safe for concurrent encode() calls.
class EmbeddingStore final : public EmbeddingProvider {
 public:
  /// Throws MissingFile, or SchemaViolation for a truncated/corrupt file.
  explicit EmbeddingStore(const std::filesystem::path& path);

  /// Throws CacheMiss when (text, side) is not in the store.
  EncodedText encode(std::string_view text, Side side) override;

  bool contains(std::string_view text, Side side) const;
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  struct KeyHash {
    std::size_t operator()(const Sha256& h) const noexcept;
  };

  std::size_t dim_ = 0;
  std::unordered_map<Sha256, EncodedText, KeyHash> records_;
};

/// Collects records and writes them sorted by hash, so output bytes depend
/// only on the set of records.
class EmbeddingStoreWriter {
 public:
  /// Throws DimensionMismatch if `e` disagrees with earlier records.
  void add(const EncodedText& e);
  std::size_t size() const noexcept { return records_.size(); }
  void write(const std::filesystem::path& path) const;

 private:
  std::size_t dim_ = 0;
  std::map<Sha256, EncodedText> records_;
};

}  // namespace nsir
