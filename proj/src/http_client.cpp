#include "coop_rag/http_client.hpp"

#include "coop_rag/error.hpp"

#include <httplib.h>

#include <cstdlib>

namespace coop_rag {

namespace {

struct ParsedUrl {
  std::string origin; // scheme://host[:port]
  std::string prefix; // path without trailing slash
};

ParsedUrl parse_base_url(const std::string &base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::config_error, "base_url must include a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.prefix = base_url.substr(path_start);
    while (!out.prefix.empty() && out.prefix.back() == '/') {
      out.prefix.pop_back();
    }
  }
  return out;
}

void configure(httplib::Client &client, int timeout_ms) {
  const auto secs = timeout_ms / 1000;
  const auto usecs = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
}

} // namespace

void RemoteEndpoint::validate(std::string_view what) const {
  if (base_url.empty()) {
    throw Error(Errc::config_error, std::string(what) + ": remote.base_url is required");
  }
  parse_base_url(base_url);
  if (timeout_ms <= 0) {
    throw Error(Errc::config_error, std::string(what) + ": remote.timeout_ms must be positive");
  }
  if (max_in_flight <= 0) {
    throw Error(Errc::config_error, std::string(what) + ": remote.max_in_flight must be positive");
  }
}

std::optional<std::string> RemoteEndpoint::bearer_token() const {
  if (auth_env_var.empty()) {
    return std::nullopt;
  }
  const char *value = std::getenv(auth_env_var.c_str());
  if (value == nullptr || *value == '\0') {
    return std::nullopt;
  }
  return std::string(value);
}

HttpResult http_post_json(const RemoteEndpoint &endpoint, std::string_view path,
                          const std::string &body) {
  const auto url = parse_base_url(endpoint.base_url);
  httplib::Client client(url.origin);
  configure(client, endpoint.timeout_ms);
  httplib::Headers headers;
  if (auto token = endpoint.bearer_token()) {
    headers.emplace("Authorization", "Bearer " + *token);
  }
  const auto full_path = url.prefix + std::string(path);
  auto res = client.Post(full_path, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto what = endpoint.base_url + std::string(path) + ": " + httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw Error(Errc::timeout, "request timed out: " + what);
    }
    throw Error(Errc::transport, "transport failure: " + what);
  }
  return {res->status, res->body};
}

bool http_probe(const RemoteEndpoint &endpoint, int timeout_ms) {
  try {
    const auto url = parse_base_url(endpoint.base_url);
    httplib::Client client(url.origin);
    configure(client, timeout_ms);
    auto res = client.Get(url.prefix.empty() ? "/" : url.prefix);
    return static_cast<bool>(res);
  } catch (const std::exception &) {
    return false;
  }
}

} // namespace coop_rag
