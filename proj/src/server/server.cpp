#include "quizmaster/server.hpp"

#include <deque>
#include <iostream>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "quizmaster/errors.hpp"

namespace quizmaster {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

// "/sessions/{id}/stream" -> id
std::optional<std::string> stream_id(std::string_view target) {
  target = target.substr(0, target.find('?'));
  constexpr std::string_view prefix = "/sessions/";
  constexpr std::string_view suffix = "/stream";
  if (!target.starts_with(prefix) || !target.ends_with(suffix)) return std::nullopt;
  const auto id = target.substr(prefix.size(), target.size() - prefix.size() - suffix.size());
  if (id.empty() || id.find('/') != std::string_view::npos) return std::nullopt;
  return std::string(id);
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<Api> api, std::string id)
      : ws_(std::move(socket)), api_(std::move(api)), id_(std::move(id)) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto executor = ws_.get_executor();
    sub_ = api_->subscribe(id_, [weak, executor](const std::string& message) {
      if (auto self = weak.lock()) {
        net::post(executor, [self, message] { self->send(message); });
      }
    });
    if (!sub_) {
      ws_.async_close(websocket::close_reason(websocket::close_code::policy_error, "unknown session"),
                      [self = shared_from_this()](beast::error_code) {});
      return;
    }
    for (auto& line : sub_->backlog) send(std::move(line));
    sub_->backlog.clear();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  // Incoming frames are ignored; the read loop only notices the close.
  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      if (sub_) api_->unsubscribe(*sub_);
      sub_.reset();
      return;
    }
    buffer_.consume(buffer_.size());
    do_read();
  }

  void send(std::string message) {
    queue_.push_back(std::move(message));
    if (queue_.size() == 1) do_write();
  }

  void do_write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    queue_.pop_front();
    if (!queue_.empty()) do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<Api> api_;
  std::string id_;
  std::optional<Api::Subscription> sub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<Api> api) : stream_(std::move(socket)), api_(std::move(api)) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(60));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) return close();
    if (ec) return;

    if (websocket::is_upgrade(req_)) {
      const auto id = stream_id(std::string_view(req_.target().data(), req_.target().size()));
      if (id && api_->get_state(*id).status == 200) {
        stream_.expires_never();
        std::make_shared<WsSession>(stream_.release_socket(), api_, *id)->run(std::move(req_));
        return;
      }
      return reply(ApiResponse{404, {{"error", {{"code", "not_found"}, {"message", "no such stream"}}}}});
    }

    ApiResponse r;
    try {
      r = api_->handle(std::string_view(req_.method_string().data(), req_.method_string().size()),
                       std::string_view(req_.target().data(), req_.target().size()), req_.body());
    } catch (const std::exception& e) {
      r = ApiResponse{500, {{"error", {{"code", "internal"}, {"message", e.what()}}}}};
    }
    reply(r);
  }

  void reply(const ApiResponse& r) {
    auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status),
                                                                  req_.version());
    res->set(http::field::server, "quizmaster");
    res->set(http::field::content_type, "application/json");
    res->set(http::field::access_control_allow_origin, "*");
    res->keep_alive(req_.keep_alive());
    res->body() = r.body.dump();
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!res->keep_alive()) return self->close();
      self->do_read();
    });
  }

  void close() {
    beast::error_code ec;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<Api> api_;
};

}  // namespace

struct Server::Impl {
  std::shared_ptr<Api> api;
  unsigned threads;
  net::io_context ioc;
  tcp::acceptor acceptor;
  net::steady_timer sweeper;
  std::vector<std::thread> workers;

  Impl(std::shared_ptr<Api> a, const std::string& address, std::uint16_t port, unsigned n)
      : api(std::move(a)), threads(n == 0 ? 1 : n), ioc(static_cast<int>(threads)), acceptor(ioc), sweeper(ioc) {
    beast::error_code ec;
    const auto addr = net::ip::make_address(address, ec);
    if (ec) throw ArgumentError("bad listen address '" + address + "'");
    tcp::endpoint endpoint(addr, port);
    acceptor.open(endpoint.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(endpoint, ec);
    if (ec) throw IoError("cannot bind " + address + ":" + std::to_string(port) + ": " + ec.message());
    acceptor.listen(net::socket_base::max_listen_connections);
  }

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<HttpSession>(std::move(socket), api)->run();
      if (acceptor.is_open()) accept();
    });
  }

  void sweep() {
    sweeper.expires_after(std::chrono::seconds(60));
    sweeper.async_wait([this](beast::error_code ec) {
      if (ec) return;
      api->expire_idle();
      sweep();
    });
  }
};

Server::Server(std::shared_ptr<Api> api, const std::string& address, std::uint16_t port, unsigned threads)
    : impl_(std::make_unique<Impl>(std::move(api), address, port, threads)) {}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::start() {
  impl_->accept();
  impl_->sweep();
  for (unsigned i = 0; i < impl_->threads; ++i) {
    impl_->workers.emplace_back([this] { impl_->ioc.run(); });
  }
}

void Server::wait() {
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
}

void Server::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  wait();
}

}  // namespace quizmaster
