#pragma once

// Out-of-line definition of the httplib-backed transport. Only the CLI pulls
// this in; tests exercise the provider through fake transports.

#include <httplib.h>

#include "rtlscan/provider.hpp"

namespace rtlscan {

inline HttpResponse HttplibTransport::post(
    const std::string& url,
    const std::vector<std::pair<std::string, std::string>>& headers,
    const std::string& body, int timeout_s) {
  // Split scheme://host[:port]/path
  std::string rest = url;
  size_t scheme_end = rest.find("://");
  if (scheme_end != std::string::npos) rest = rest.substr(scheme_end + 3);
  size_t path_start = rest.find('/');
  std::string host = path_start == std::string::npos ? rest : rest.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : rest.substr(path_start);
  std::string origin = url.substr(0, url.size() - path.size());

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_s);
  client.set_read_timeout(timeout_s);
  httplib::Headers h;
  for (const auto& [k, v] : headers)
    if (k != "Content-Type") h.emplace(k, v);
  auto result = client.Post(path, h, body, "application/json");
  if (!result) return {0, "transport error: " + httplib::to_string(result.error())};
  return {result->status, result->body};
}

}  // namespace rtlscan
