#include "ftfloor/http_server.hpp"

#include <httplib.h>

#include <thread>

#include "ftfloor/util.hpp"

namespace ftfloor {

struct HttpServer::Impl {
  std::shared_ptr<Gateway> gateway;
  httplib::Server server;
  std::thread thread;
  int port = -1;
};

HttpServer::HttpServer(std::shared_ptr<Gateway> gateway) : impl_(new Impl) {
  impl_->gateway = std::move(gateway);
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const std::string target = req.target.empty() ? req.path : req.target;
    HttpResponse out = impl_->gateway->handle(req.method, target);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(R"(/.*)", forward);
  impl_->server.Post(R"(/.*)", forward);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::start(const std::string& host, int port) {
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port < 0) return false;
  } else {
    if (!impl_->server.bind_to_port(host, port)) return false;
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return true;
}

void HttpServer::stop() {
  if (!impl_) return;
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const { return impl_->port; }

std::optional<HttpResult> http_request(const std::string& method,
                                       const std::string& endpoint,
                                       const std::string& target) {
  // endpoint may be "host:port" or a full URL; target may itself be absolute,
  // in which case its path?query part is what gets sent.
  std::string host = endpoint;
  if (host.find("://") == std::string::npos) host = "http://" + host;
  auto parsed = util::parse_url(target);
  std::string path_query = parsed.path;
  bool first = true;
  for (const auto& [k, v] : parsed.query) {
    path_query += first ? '?' : '&';
    path_query += k + "=" + v;
    first = false;
  }
  httplib::Client client(host);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(300, 0);
  httplib::Result res = method == "POST" ? client.Post(path_query)
                                         : client.Get(path_query);
  if (!res) return std::nullopt;
  return HttpResult{res->status, res->body};
}

}  // namespace ftfloor
