#include "nsir/http_util.hpp"

#include "nsir/error.hpp"

namespace nsir {

HttpEndpoint parse_http_url(std::string_view url) {
  std::size_t scheme_end = 0;
  if (url.starts_with("http://")) {
    scheme_end = 7;
  } else if (url.starts_with("https://")) {
    scheme_end = 8;
  } else {
    throw Error(ErrorCode::Config, "not an http(s) URL: " + std::string(url));
  }
  const std::size_t slash = url.find('/', scheme_end);
  HttpEndpoint ep;
  ep.origin = std::string(url.substr(0, slash));
  if (ep.origin.size() == scheme_end) throw Error(ErrorCode::Config, "URL has no host: " + std::string(url));
  if (slash != std::string_view::npos) {
    ep.path_prefix = std::string(url.substr(slash));
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  return ep;
}

}  // namespace nsir
