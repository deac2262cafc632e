#include "nsir/embedding_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "nsir/error.hpp"

namespace nsir {
namespace {

static_assert(std::endian::native == std::endian::little,
              "store I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

constexpr char kMagic[4] = {'N', 'S', 'I', 'R'};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T read() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::SchemaViolation, "embedding store truncated at byte " + std::to_string(pos_), pos_);
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

std::size_t EmbeddingStore::KeyHash::operator()(const Sha256& h) const noexcept {
  std::size_t v;
  std::memcpy(&v, h.data(), sizeof(v));
  return v;
}

EmbeddingStore::EmbeddingStore(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open embedding store " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(in), {}));

  const std::string magic = r.read_bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::SchemaViolation, path.string() + " is not an NSIR embedding store");
  }
  const auto version = r.read<std::uint32_t>();
  if (version != kStoreVersion) {
    throw Error(ErrorCode::SchemaViolation, "unsupported store version " + std::to_string(version));
  }
  dim_ = r.read<std::uint32_t>();
  const auto count = r.read<std::uint64_t>();
  if (count > 0 && dim_ == 0) throw Error(ErrorCode::SchemaViolation, "store has records but dim 0");

  records_.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    EncodedText e;
    const std::string hash = r.read_bytes(32);
    std::memcpy(e.text_hash.data(), hash.data(), 32);
    const auto tokens = r.read<std::uint32_t>();
    e.surface_tokens.reserve(tokens);
    for (std::uint32_t t = 0; t < tokens; ++t) {
      const auto len = r.read<std::uint16_t>();
      e.surface_tokens.push_back(r.read_bytes(len));
    }
    e.cls.resize(dim_);
    for (auto& x : e.cls) x = r.read<float>();
    e.token_matrix = Matrix(tokens, dim_);
    for (std::uint32_t t = 0; t < tokens; ++t) {
      for (auto& x : e.token_matrix.row(t)) x = r.read<float>();
    }
    records_.insert_or_assign(e.text_hash, std::move(e));
  }
  if (!r.at_end()) throw Error(ErrorCode::SchemaViolation, "trailing bytes after last record");
}

EncodedText EmbeddingStore::encode(std::string_view text, Side side) {
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "encode of empty text");
  const auto it = records_.find(text_key(text, side));
  if (it == records_.end()) {
    throw Error(ErrorCode::CacheMiss,
                std::string(to_string(side)) + " text not in store: " +
                    std::string(text.substr(0, 60)));
  }
  return it->second;
}

bool EmbeddingStore::contains(std::string_view text, Side side) const {
  return records_.contains(text_key(text, side));
}

void EmbeddingStoreWriter::add(const EncodedText& e) {
  validate(e);
  if (records_.empty() && dim_ == 0) dim_ = e.dim();
  if (e.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "record dimension " + std::to_string(e.dim()) + " differs from store dimension " +
                    std::to_string(dim_));
  }
  records_.insert_or_assign(e.text_hash, e);
}

void EmbeddingStoreWriter::write(const std::filesystem::path& path) const {
  std::string out;
  out.append(kMagic, 4);
  put<std::uint32_t>(out, kStoreVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  put<std::uint64_t>(out, records_.size());
  for (const auto& [hash, e] : records_) {
    out.append(reinterpret_cast<const char*>(hash.data()), hash.size());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.surface_tokens.size()));
    for (const auto& s : e.surface_tokens) {
      if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw Error(ErrorCode::InvalidArgument, "token surface longer than 65535 bytes");
      }
      put<std::uint16_t>(out, static_cast<std::uint16_t>(s.size()));
      out.append(s);
    }
    for (double x : e.cls) put<float>(out, static_cast<float>(x));
    for (double x : e.token_matrix.data()) put<float>(out, static_cast<float>(x));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace nsir
