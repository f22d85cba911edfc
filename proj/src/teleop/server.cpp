#include "rockcap/teleop/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

#include "rockcap/eval/scenario.hpp"

namespace rockcap::teleop {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const ServeOptions& options, std::function<void()> on_done)
      : ws_(std::move(socket)),
        options_(options),
        session_(options.session, options.episode, options.geometry, options.material,
                 options.config_hash),
        on_done_(std::move(on_done)) {}

  void start() {
    ws_.binary(true);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->finish();
      self->send(encode(ServerMessage{self->session_.hello()}), false);
      self->physics_ = std::thread([self] { self->physics_loop(); });
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->controls_.notify();
        return self->maybe_finish();
      }
      const std::string bytes = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      try {
        const ClientMessage m = decode_client(bytes);
        if (const auto* c = std::get_if<ControlMessage>(&m)) {
          self->controls_.put(*c);
        } else {
          self->start_requested_ = true;
          self->controls_.notify();
        }
      } catch (const ProtocolError& e) {
        self->send(encode(ServerMessage{ErrorFrame{e.what()}}), false);
      }
      self->read();
    });
  }

  // Safe from any thread.
  void send(std::string bytes, bool droppable) {
    net::post(ws_.get_executor(), [self = shared_from_this(), bytes = std::move(bytes), droppable] {
      if (self->closed_) return;
      if (droppable && self->queue_.size() >= self->options_.max_queued_frames) return;
      self->queue_.push_back(std::move(bytes));
      if (self->queue_.size() == 1) self->write();
    });
  }

  void write() {
    ws_.async_write(net::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->controls_.notify();
                        return self->maybe_finish();
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) return self->write();
                      if (self->closing_) self->close();
                    });
  }

  void close() {
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {
                      self->closed_ = true;
                      self->controls_.notify();
                      self->maybe_finish();
                    });
  }

  // Called by the physics thread once the last trial is reported.
  void request_close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (self->queue_.empty() && !self->closed_) self->close();
    });
  }

  void physics_loop() {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(options_.episode.dt));
    const bool lockstep = options_.session.lockstep;
    while (!closed_) {
      controls_.wait_newer(UINT64_MAX, std::chrono::milliseconds(100),
                           [&] { return start_requested_.load() || closed_.load(); });
      if (closed_) break;
      if (!start_requested_.exchange(false)) continue;
      if (session_.finished()) continue;
      // Taken before the first frame goes out so a fast client's first command is not missed.
      std::uint64_t seen = controls_.latest().second;
      send(encode(ServerMessage{session_.start_trial()}), false);
      auto next = clock::now();
      std::optional<TrialResult> result;
      while (!result && !closed_) {
        std::optional<ControlMessage> c;
        if (lockstep) {
          auto [v, seq] = controls_.wait_newer(seen, std::chrono::milliseconds(100),
                                               [&] { return closed_.load(); });
          if (seq == seen) continue;
          seen = seq;
          c = v;
        } else {
          next += period;
          std::this_thread::sleep_until(next);
          c = controls_.latest().first;
        }
        result = session_.step(c ? c->keys : KeyStates{});
        const int k = session_.environment().step_count();
        if (lockstep || result || k % options_.frame_every == 0)
          send(encode(ServerMessage{session_.frame()}), !lockstep && !result);
      }
      if (!result) {
        session_.abort_trial();
        break;
      }
      const env::EpisodeRecord& rec = session_.records().back();
      if (!options_.store_dir.empty()) eval::store_record(options_.store_dir, rec);
      if (options_.on_record) options_.on_record(rec);
      send(encode(ServerMessage{*result}), false);
      if (session_.finished()) {
        const SessionEnd end = session_.summary();
        if (!options_.store_dir.empty()) {
          const eval::Metrics m = eval::compute_metrics(session_.records());
          eval::append_summary(options_.store_dir, eval::Scenario::human, m,
                               session_.records().front().seed, options_.config_hash);
        }
        send(encode(ServerMessage{end}), false);
        request_close();
        break;
      }
    }
    physics_done_ = true;
    net::post(ws_.get_executor(), [self = shared_from_this()] { self->maybe_finish(); });
  }

  void maybe_finish() {
    if (!closed_ || finished_) return;
    if (physics_.joinable() && !physics_done_) return;
    finish();
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    if (physics_.joinable()) physics_.join();
    beast::error_code ec;
    beast::get_lowest_layer(ws_).close(ec);
    on_done_();
  }

  websocket::stream<tcp::socket> ws_;
  const ServeOptions& options_;
  TeleopSession session_;
  std::function<void()> on_done_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  LatestMailbox<ControlMessage> controls_;
  std::thread physics_;
  std::atomic<bool> closed_{false};
  std::atomic<bool> start_requested_{false};
  std::atomic<bool> physics_done_{false};
  bool closing_ = false;
  bool finished_ = false;
};

}  // namespace

void serve(const ServeOptions& options) {
  net::io_context io;
  tcp::acceptor acceptor(io);
  try {
    const tcp::endpoint ep(net::ip::make_address(options.address), options.port);
    acceptor.open(ep.protocol());
    acceptor.set_option(net::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw ServeError(
        fmt::format("cannot listen on {}:{}: {}", options.address, options.port, e.what()));
  }
  if (options.on_listening) options.on_listening(acceptor.local_endpoint().port());

  int sessions = 0;
  bool busy = false;
  std::function<void()> accept;
  accept = [&] {
    acceptor.async_accept([&](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      if (busy) {
        // One session at a time; later clients are turned away.
        beast::error_code ignored;
        socket.close(ignored);
        return accept();
      }
      busy = true;
      std::make_shared<Connection>(std::move(socket), options, [&] {
        busy = false;
        ++sessions;
        if (options.max_sessions > 0 && sessions >= options.max_sessions) {
          beast::error_code ignored;
          acceptor.close(ignored);
        }
      })->start();
      accept();
    });
  };
  accept();
  io.run();
}

struct HeadlessClient::Impl {
  net::io_context io;
  websocket::stream<tcp::socket> ws{io};
  beast::flat_buffer buffer;
};

HeadlessClient::HeadlessClient(const std::string& host, std::uint16_t port)
    : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->io);
  net::connect(impl_->ws.next_layer(), resolver.resolve(host, std::to_string(port)));
  impl_->ws.binary(true);
  impl_->ws.handshake(fmt::format("{}:{}", host, port), "/");
}

HeadlessClient::~HeadlessClient() {
  beast::error_code ec;
  impl_->ws.next_layer().close(ec);
}

void HeadlessClient::send(const ClientMessage& m) { send_raw(encode(m)); }

void HeadlessClient::send_raw(const std::string& bytes) {
  impl_->ws.write(net::buffer(bytes));
}

ServerMessage HeadlessClient::receive() {
  impl_->buffer.consume(impl_->buffer.size());
  impl_->ws.read(impl_->buffer);
  return decode_server(beast::buffers_to_string(impl_->buffer.data()));
}

void HeadlessClient::close() {
  beast::error_code ec;
  impl_->ws.close(websocket::close_code::normal, ec);
}

}  // namespace rockcap::teleop
