#pragma once

#include <string>
#include <string_view>

namespace nsir {

/// "http://host:8080/v1" -> origin "http://host:8080", path_prefix "/v1".
struct HttpEndpoint {
  std::string origin;
  std::string path_prefix;

  std::string path(std::string_view suffix) const { return path_prefix + std::string(suffix); }
};

/// Throws Config for anything that is not an http(s) URL.
HttpEndpoint parse_http_url(std::string_view url);

}  // namespace nsir
