#pragma once

// Blocking Boost.Beast server: WebSocket sessions on /session, static files
// for everything else. One thread per connection.

#include <sys/socket.h>

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "cogdial/session/service.hpp"

namespace cogdial::session {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

inline std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  if (ext == ".woff2") return "font/woff2";
  return "application/octet-stream";
}

// Maps a request target to a file under `root`; empty when it escapes root.
inline std::filesystem::path static_path(const std::filesystem::path& root, std::string_view target) {
  std::string path(target.substr(0, target.find_first_of("?#")));
  if (path.empty() || path[0] != '/') return {};
  if (path.back() == '/') path += "index.html";
  std::filesystem::path rel = std::filesystem::path(path.substr(1)).lexically_normal();
  if (rel.empty() || *rel.begin() == "..") return {};
  return root / rel;
}

class WsServer {
 public:
  struct Options {
    std::string address = "127.0.0.1";
    unsigned short port = 0;  // 0 picks an ephemeral port
    std::filesystem::path static_dir;
  };

  WsServer(SessionService& service, Options options) : service_(service), options_(std::move(options)) {}
  ~WsServer() { stop(); }
  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;

  void start() {
    tcp::endpoint ep{net::ip::make_address(options_.address), options_.port};
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept_thread_ = std::thread([this] { accept_loop(); });
  }

  unsigned short port() const { return port_; }

  void stop() {
    if (stopping_.exchange(true) || !accept_thread_.joinable()) return;
    ::shutdown(acceptor_.native_handle(), SHUT_RDWR);
    accept_thread_.join();
    beast::error_code ec;
    acceptor_.close(ec);
    std::unique_lock lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    idle_.wait(lock, [this] { return active_ == 0; });
  }

 private:
  void accept_loop() {
    while (!stopping_) {
      tcp::socket socket(ioc_);
      beast::error_code ec;
      acceptor_.accept(socket, ec);
      if (ec) {
        if (stopping_) break;
        continue;
      }
      {
        std::lock_guard lock(mu_);
        ++active_;
        open_fds_.insert(socket.native_handle());
      }
      std::thread([this, s = std::move(socket)]() mutable { serve(std::move(s)); }).detach();
    }
  }

  void serve(tcp::socket socket) {
    const int fd = socket.native_handle();
    try {
      handle_connection(socket);
    } catch (const std::exception& e) {
      if (!stopping_) std::cerr << "connection error: " << e.what() << "\n";
    }
    std::lock_guard lock(mu_);
    open_fds_.erase(fd);
    --active_;
    idle_.notify_all();
  }

  void handle_connection(tcp::socket& socket) {
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      beast::error_code ec;
      http::read(socket, buffer, req, ec);
      if (ec == http::error::end_of_stream || ec) return;

      if (websocket::is_upgrade(req)) {
        if (req.target() != "/session") {
          respond(socket, req, http::status::not_found, "text/plain", "no such endpoint\n");
          return;
        }
        run_websocket(socket, req);
        return;
      }
      if (!serve_static(socket, req) || !req.keep_alive()) return;
    }
  }

  void run_websocket(tcp::socket& socket, const http::request<http::string_body>& req) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.accept(req);
    beast::flat_buffer buffer;
    for (;;) {
      beast::error_code ec;
      ws.read(buffer, ec);
      if (ec) return;  // closed or shut down
      const std::string text = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      for (const auto& msg : service_.handle_text(text)) {
        ws.text(true);
        ws.write(net::buffer(msg.dump()));
      }
    }
  }

  bool serve_static(tcp::socket& socket, const http::request<http::string_body>& req) {
    if (req.method() != http::verb::get && req.method() != http::verb::head)
      return respond(socket, req, http::status::method_not_allowed, "text/plain", "method not allowed\n");
    if (options_.static_dir.empty())
      return respond(socket, req, http::status::not_found, "text/plain", "not found\n");
    auto path = static_path(options_.static_dir, std::string_view(req.target().data(), req.target().size()));
    std::error_code fec;
    if (path.empty() || !std::filesystem::is_regular_file(path, fec))
      return respond(socket, req, http::status::not_found, "text/plain", "not found\n");
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return respond(socket, req, http::status::ok, mime_type(path), body.str());
  }

  bool respond(tcp::socket& socket, const http::request<http::string_body>& req, http::status status,
               const std::string& type, std::string body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "cogdial");
    res.set(http::field::content_type, type);
    res.keep_alive(req.keep_alive());
    const bool head = req.method() == http::verb::head;
    res.content_length(body.size());
    if (!head) res.body() = std::move(body);
    beast::error_code ec;
    if (head) {
      http::response_serializer<http::string_body> sr{res};
      http::write_header(socket, sr, ec);
    } else {
      http::write(socket, res, ec);
    }
    return !ec;
  }

  SessionService& service_;
  Options options_;
  net::io_context ioc_;
  tcp::acceptor acceptor_{ioc_};
  unsigned short port_ = 0;
  std::thread accept_thread_;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::condition_variable idle_;
  std::set<int> open_fds_;
  int active_ = 0;
};

}  // namespace cogdial::session
