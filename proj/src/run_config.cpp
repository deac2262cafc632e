#include "nsir/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include "nsir/error.hpp"

namespace nsir {

ScoringOptions RunConfig::scoring() const {
  ScoringOptions s;
  s.w1 = w1;
  s.w2 = w2;
  s.normalize = normalize_fused;
  s.d_k = d_k;
  s.include_cls = include_cls;
  return s;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::Config, why); };
  if (c.k < 1) fail("k must be at least 1");
  if (!std::isfinite(c.w1) || !std::isfinite(c.w2)) fail("weights must be finite");
  if (c.d_k && !(*c.d_k > 0.0 && std::isfinite(*c.d_k))) fail("d_k must be positive");
  if (c.marginals != "uniform") fail("marginals must be 'uniform'");
  if (c.threads < 1) fail("threads must be at least 1");
  if (c.doc_char_limit < 1) fail("doc_char_limit must be at least 1");
  if (c.run_tag.empty() || c.run_tag.find_first_of(" \t\r\n") != std::string::npos) {
    fail("run_tag must be a non-empty word");
  }
  if (!c.uses_store() && c.provider.rfind("http://", 0) != 0 && c.provider.rfind("https://", 0) != 0) {
    fail("provider must be 'store' or an http(s) URL, got '" + c.provider + "'");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out)) {
    throw Error(ErrorCode::Config, key + ": '" + v + "' is not a finite number");
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(ErrorCode::Config, key + ": '" + v + "' is not a count");
  return static_cast<std::size_t>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::Config, key + ": '" + v + "' is not a boolean");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::pair<double, double> parse_weights(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error(ErrorCode::Config, "weights: expected 'w1,w2', got '" + s + "'");
  return {parse_double("weights", trim(s.substr(0, comma))), parse_double("weights", trim(s.substr(comma + 1)))};
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "k") {
    c.k = parse_count(key, v);
  } else if (key == "marginals") {
    c.marginals = v;
  } else if (key == "d_k") {
    if (v == "auto") {
      c.d_k.reset();
    } else {
      c.d_k = parse_double(key, v);
    }
  } else if (key == "weights") {
    std::tie(c.w1, c.w2) = parse_weights(v);
  } else if (key == "normalize_fused") {
    c.normalize_fused = parse_bool(key, v);
  } else if (key == "include_cls") {
    c.include_cls = parse_bool(key, v);
  } else if (key == "provider") {
    c.provider = v;
  } else if (key == "store") {
    c.store = v;
  } else if (key == "llm_base") {
    c.llm_base = v;
  } else if (key == "llm_model") {
    c.llm_model = v;
  } else if (key == "temperature") {
    c.temperature = parse_double(key, v);
  } else if (key == "cache") {
    c.cache = v;
  } else if (key == "threads") {
    c.threads = parse_count(key, v);
  } else if (key == "doc_char_limit") {
    c.doc_char_limit = parse_count(key, v);
  } else if (key == "run_tag") {
    c.run_tag = v;
  } else if (key == "seed") {
    if (v == "none") {
      c.seed.reset();
    } else {
      c.seed = parse_count(key, v);
    }
  } else {
    throw Error(ErrorCode::Config, "unknown config key '" + key + "'");
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config " + path.string());
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": expected key = value", lineno);
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  return {
      {"k", std::to_string(c.k)},
      {"marginals", c.marginals},
      {"d_k", c.d_k ? format_double(*c.d_k) : "auto"},
      {"weights", format_double(c.w1) + "," + format_double(c.w2)},
      {"normalize_fused", c.normalize_fused ? "true" : "false"},
      {"include_cls", c.include_cls ? "true" : "false"},
      {"provider", c.provider},
      {"store", c.store.string()},
      {"llm_base", c.llm_base},
      {"llm_model", c.llm_model},
      {"temperature", format_double(c.temperature)},
      {"cache", c.cache.string()},
      {"threads", std::to_string(c.threads)},
      {"doc_char_limit", std::to_string(c.doc_char_limit)},
      {"run_tag", c.run_tag},
      {"seed", c.seed ? std::to_string(*c.seed) : "none"},
  };
}

std::string echo_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : echo(c)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace nsir
