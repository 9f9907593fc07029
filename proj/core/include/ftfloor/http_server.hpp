#pragma once

#include <memory>
#include <string>

#include "ftfloor/gateway.hpp"

namespace ftfloor {

// Serves a Gateway over HTTP on a background thread.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Gateway> gateway);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // port 0 picks a free port; see port() afterwards.
  bool start(const std::string& host, int port);
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Client-side helper shared by the CLI and the workflow runner.
struct HttpResult {
  int status = 0;
  std::string body;
};
// Returns nullopt when the endpoint is unreachable.
std::optional<HttpResult> http_request(const std::string& method,
                                       const std::string& endpoint,
                                       const std::string& target);

}  // namespace ftfloor
