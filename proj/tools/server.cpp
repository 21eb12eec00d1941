#include "server.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

namespace hrc {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

std::string_view mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

// "/sessions/{id}/stream" -> id, empty when the target is not a stream path.
std::string stream_session(std::string_view target, long& from) {
  from = 0;
  std::string_view path = target.substr(0, target.find('?'));
  constexpr std::string_view prefix = "/sessions/";
  constexpr std::string_view suffix = "/stream";
  if (path.size() <= prefix.size() + suffix.size() || path.substr(0, prefix.size()) != prefix ||
      path.substr(path.size() - suffix.size()) != suffix)
    return {};
  const std::string id(path.substr(prefix.size(), path.size() - prefix.size() - suffix.size()));
  if (id.find('/') != std::string::npos) return {};
  if (const auto q = target.find("from="); q != std::string_view::npos) {
    from = std::strtol(std::string(target.substr(q + 5)).c_str(), nullptr, 10);
    if (from < 0) from = 0;
  }
  return id;
}

}  // namespace

struct SandboxServer::Impl {
  ServerOptions opts;
  SessionManager manager;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::atomic<bool> stopping{false};
  std::mutex threads_mu;
  std::vector<std::thread> threads;
  std::set<tcp::socket*> live;  // open connections, shut down on stop()

  struct Live {
    Impl& impl;
    tcp::socket* sock;
    Live(Impl& i, tcp::socket& s) : impl(i), sock(&s) {
      std::lock_guard lock(impl.threads_mu);
      impl.live.insert(sock);
    }
    ~Live() {
      std::lock_guard lock(impl.threads_mu);
      impl.live.erase(sock);
    }
  };

  explicit Impl(ServerOptions o) : opts(std::move(o)), manager(opts.manager), acceptor(ioc) {
    const tcp::endpoint ep(asio::ip::make_address(opts.address), opts.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket sock) {
      if (ec || stopping) return;
      std::lock_guard lock(threads_mu);
      threads.emplace_back([this, s = std::move(sock)]() mutable { serve(std::move(s)); });
      accept();
    });
  }

  template <class Body>
  void send(tcp::socket& sock, const http::request<http::string_body>& req, http::response<Body>& res) {
    res.set(http::field::server, "hrcplan");
    res.set(http::field::access_control_allow_origin, "*");
    res.keep_alive(req.keep_alive());
    res.prepare_payload();
    beast::error_code ec;
    http::write(sock, res, ec);
  }

  http::response<http::string_body> json_response(const http::request<http::string_body>& req, int status,
                                                  std::string body) {
    http::response<http::string_body> res{static_cast<http::status>(status), req.version()};
    if (!body.empty()) res.set(http::field::content_type, "application/json");
    res.body() = std::move(body);
    return res;
  }

  http::response<http::string_body> static_file(const http::request<http::string_body>& req) {
    if (opts.static_dir.empty() || req.method() != http::verb::get)
      return json_response(req, 404, R"({"error":"not found"})");
    std::string rel(req.target().substr(0, req.target().find('?')));
    if (rel.find("..") != std::string::npos) return json_response(req, 400, R"({"error":"bad path"})");
    if (rel.empty() || rel.back() == '/') rel += "index.html";
    const std::filesystem::path p = std::filesystem::path(opts.static_dir) / rel.substr(1);
    std::ifstream in(p, std::ios::binary);
    if (!in) return json_response(req, 404, R"({"error":"not found"})");
    std::ostringstream ss;
    ss << in.rdbuf();
    http::response<http::string_body> res{http::status::ok, req.version()};
    res.set(http::field::content_type, std::string(mime_type(p)));
    res.body() = ss.str();
    return res;
  }

  void stream(tcp::socket sock, const http::request<http::string_body>& req, const std::string& id, long from) {
    auto entry = manager.find(id);
    if (!entry) {
      auto res = json_response(req, 404, fmt::format(R"({{"error":"unknown session '{}'"}})", id));
      send(sock, req, res);
      return;
    }
    websocket::stream<tcp::socket> ws(std::move(sock));
    const Live guard(*this, ws.next_layer());
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);
    std::size_t next = static_cast<std::size_t>(from);
    for (;;) {
      std::vector<std::string> out;
      bool finished = false;
      bool closed = false;
      {
        std::unique_lock lock(entry->mu);
        entry->changed.wait_for(lock, std::chrono::milliseconds(200), [&] {
          return stopping || entry->closed || entry->session.frames().size() > next;
        });
        const auto& frames = entry->session.frames();
        for (; next < frames.size(); ++next) out.push_back(frames[next].to_json());
        finished = entry->session.status() == SessionStatus::Done;
        closed = entry->closed;
      }
      for (const auto& f : out) {
        ws.write(asio::buffer(f), ec);
        if (ec) return;
      }
      if (finished) {
        ws.close(websocket::close_code::normal, ec);
        return;
      }
      if (closed || stopping) {
        ws.close(websocket::close_code::going_away, ec);
        return;
      }
    }
  }

  void serve(tcp::socket sock) {
    std::optional<Live> guard(std::in_place, *this, sock);
    beast::flat_buffer buffer;
    for (;;) {
      http::request<http::string_body> req;
      beast::error_code ec;
      http::read(sock, buffer, req, ec);
      if (ec) break;
      long from = 0;
      if (websocket::is_upgrade(req)) {
        const std::string id = stream_session(std::string_view(req.target().data(), req.target().size()), from);
        if (id.empty()) {
          auto res = json_response(req, 404, R"({"error":"not a stream endpoint"})");
          send(sock, req, res);
          break;
        }
        guard.reset();
        stream(std::move(sock), req, id, from);
        return;
      }
      const std::string_view target(req.target().data(), req.target().size());
      http::response<http::string_body> res;
      if (req.method() == http::verb::options) {
        res = json_response(req, 204, "");
        res.set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
        res.set(http::field::access_control_allow_headers, "Content-Type");
      } else if (target.substr(0, 9) == "/sessions") {
        const std::string_view method(req.method_string().data(), req.method_string().size());
        const ApiResponse api = handle_api(manager, method, target, req.body());
        res = json_response(req, api.status, api.body);
      } else {
        res = static_file(req);
      }
      const bool keep = req.keep_alive();
      send(sock, req, res);
      if (!keep) break;
    }
    beast::error_code ec;
    sock.shutdown(tcp::socket::shutdown_send, ec);
  }
};

SandboxServer::SandboxServer(ServerOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

SandboxServer::~SandboxServer() {
  stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(impl_->threads_mu);
    threads.swap(impl_->threads);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

unsigned short SandboxServer::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

SessionManager& SandboxServer::manager() noexcept { return impl_->manager; }

void SandboxServer::run() {
  impl_->accept();
  impl_->ioc.run();
}

void SandboxServer::stop() {
  impl_->stopping = true;
  {
    std::lock_guard lock(impl_->threads_mu);
    for (tcp::socket* s : impl_->live) {
      beast::error_code ec;
      s->shutdown(tcp::socket::shutdown_both, ec);
    }
  }
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->ioc.stop();
}

}  // namespace hrc
