#include <httplib.h>

#include "emsim/genai.hpp"

namespace emsim::genai {

namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderUnavailable("endpoint is not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Transport http_transport() {
  return [](const HttpRequest& req) -> HttpResponse {
    const Url u = split_url(req.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (u.origin.rfind("https://", 0) == 0)
      throw ProviderUnavailable("this build has no TLS support; use an http:// endpoint");
#endif
    httplib::Client cli(u.origin);
    const auto secs = static_cast<time_t>(req.timeout_s);
    const auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [k, v] : req.headers) {
      if (k == "Content-Type") content_type = v;
      else headers.emplace(k, v);
    }
    auto res = cli.Post(u.path, headers, req.body, content_type);
    if (!res) {
      const auto err = res.error();
      const bool timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      throw TransportError("transport error: " + httplib::to_string(err), timeout);
    }
    return {res->status, res->body};
  };
}

}  // namespace emsim::genai
