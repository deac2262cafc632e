#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsir/pipeline.hpp"

namespace nsir {

struct RunConfig {
  std::size_t k = 100;
  std::string marginals = "uniform";
  std::optional<double> d_k;  // unset means the embedding dimension
  double w1 = 1.0;
  double w2 = 1.0;
  bool normalize_fused = true;
  bool include_cls = false;
  std::string provider = "store";  // "store" or an http(s) embedding service URL
  std::filesystem::path store;
  std::string llm_base;  // empty: cached translations only
  std::string llm_model = "gpt-4o";
  double temperature = 0.5;
  std::filesystem::path cache;
  std::size_t threads = 4;
  std::size_t doc_char_limit = 6000;
  std::string run_tag = "nsir";
  std::optional<std::uint64_t> seed;  // reserved

  bool uses_store() const { return provider == "store"; }
  ScoringOptions scoring() const;
};

/// Throws Config when an invariant fails (k >= 1, finite weights, one
/// provider with what it needs, known marginals).
void validate(const RunConfig& config);

/// Applies one key=value setting. Throws Config for unknown keys and bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Lines of `key = value`; '#' starts a comment; blank lines ignored.
/// Throws Config (detail = line), also for a missing file.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// "w1,w2" -> pair. Throws Config.
std::pair<double, double> parse_weights(const std::string& s);

/// Effective settings in a fixed key order, as (key, value) pairs.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& config);
/// echo() rendered as "key = value" lines; parseable by apply_config_file.
std::string echo_text(const RunConfig& config);

}  // namespace nsir
