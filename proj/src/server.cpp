#include "gsd/server.hpp"

#include <condition_variable>
#include <deque>
#include <iostream>
#include <list>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gsd/session.hpp"

namespace gsd::service {
namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

// Counts live worker threads so the server can wait for them on shutdown.
struct WorkerCount {
  std::mutex mutex;
  std::condition_variable cv;
  int active = 0;

  void add() {
    std::lock_guard lock(mutex);
    ++active;
  }
  void remove() {
    {
      std::lock_guard lock(mutex);
      --active;
    }
    cv.notify_all();
  }
  void wait_idle() {
    std::unique_lock lock(mutex);
    cv.wait(lock, [&] { return active == 0; });
  }
};

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, WorkerCount& workers) : ws_(std::move(socket)), workers_(workers) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&Connection::on_accept, shared_from_this()));
  }

  void close_inbox() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    workers_.add();
    std::thread([self = shared_from_this()] {
      self->work();
      self->workers_.remove();
    }).detach();
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&Connection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close_inbox();
      return;
    }
    json msg;
    if (ws_.got_text()) {
      msg = json::parse(beast::buffers_to_string(buffer_.data()), nullptr, false);
    } else {
      msg = json{{"type", "binary"}};  // rejected by the session as an unknown type
    }
    buffer_.consume(buffer_.size());
    {
      std::lock_guard lock(mutex_);
      inbox_.push_back(std::move(msg));
    }
    cv_.notify_one();
    do_read();
  }

  void work() {
    for (;;) {
      json msg;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !inbox_.empty(); });
        if (closed_) return;
        coalesce_drags(inbox_);
        msg = std::move(inbox_.front());
        inbox_.pop_front();
      }
      auto replies = std::make_shared<std::vector<Reply>>(session_.handle_message(msg));
      net::post(ws_.get_executor(), [self = shared_from_this(), replies] {
        for (auto& r : *replies) self->outbox_.push_back(std::move(r));
        if (!self->writing_) self->do_write();
      });
    }
  }

  void do_write() {
    if (outbox_.empty()) {
      writing_ = false;
      return;
    }
    writing_ = true;
    Reply& next = outbox_.front();
    if (auto* j = std::get_if<json>(&next)) {
      current_text_ = j->dump();
      ws_.text(true);
      ws_.async_write(net::buffer(current_text_),
                      beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    } else {
      ws_.binary(true);
      ws_.async_write(net::buffer(std::get<std::vector<std::uint8_t>>(next)),
                      beast::bind_front_handler(&Connection::on_write, shared_from_this()));
    }
  }

  void on_write(beast::error_code ec, std::size_t) {
    outbox_.pop_front();
    if (ec) {
      writing_ = false;
      close_inbox();
      return;
    }
    do_write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  WorkerCount& workers_;
  beast::flat_buffer buffer_;

  // Shared between the network thread and the worker.
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<json> inbox_;
  bool closed_ = false;

  // Worker-only.
  Session session_;

  // Network-thread only.
  std::deque<Reply> outbox_;
  std::string current_text_;
  bool writing_ = false;
};

}  // namespace

struct Server::Impl {
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  WorkerCount workers;
  std::list<std::weak_ptr<Connection>> connections;

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto conn = std::make_shared<Connection>(std::move(socket), workers);
      connections.remove_if([](const auto& w) { return w.expired(); });
      connections.push_back(conn);
      conn->start();
      do_accept();
    });
  }
};

Server::Server(const std::string& address, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  const tcp::endpoint endpoint(net::ip::make_address(address), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  impl_->do_accept();
  impl_->ioc.run();
  for (auto& weak : impl_->connections)
    if (auto conn = weak.lock()) conn->close_inbox();
  impl_->workers.wait_idle();
}

void Server::stop() { impl_->ioc.stop(); }

}  // namespace gsd::service
