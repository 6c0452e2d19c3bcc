/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/rpc.cpp
 */
#include "minisage/rpc.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace minisage {

namespace {

// Full read/write with EINTR handling. Returns false on EOF / peer reset.
bool read_exact(int fd, void* dst, std::size_t n) {
  auto* p = static_cast<std::uint8_t*>(dst);
  while (n > 0) {
    ssize_t r = ::read(fd, p, n);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    if (r == 0) return false;
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool write_all(int fd, const void* src, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(src);
  while (n > 0) {
    ssize_t r = ::write(fd, p, n);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

// Reads one frame from a socket. Returns nullopt on clean EOF or a malformed
// frame (caller closes the connection either way).
std::optional<Frame> read_frame(int fd) {
  std::uint32_t length;
  if (!read_exact(fd, &length, sizeof(length))) return std::nullopt;
  if (length < 10 || length > kMaxFrameBytes) return std::nullopt;
  Frame f;
  if (!read_exact(fd, &f.msg_type, sizeof(f.msg_type))) return std::nullopt;
  if (!read_exact(fd, &f.request_id, sizeof(f.request_id))) return std::nullopt;
  f.body.resize(length - 10);
  if (!f.body.empty() && !read_exact(fd, f.body.data(), f.body.size())) return std::nullopt;
  return f;
}

bool write_frame(int fd, const Frame& f) {
  std::vector<std::uint8_t> buf;
  encode_frame(f, buf);
  return write_all(fd, buf.data(), buf.size());
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

void encode_frame(const Frame& f, std::vector<std::uint8_t>& out) {
  if (f.body.size() + 10 > kMaxFrameBytes) throw TransportError("frame too large");
  auto length = static_cast<std::uint32_t>(10 + f.body.size());
  std::size_t base = out.size();
  out.resize(base + 4 + length);
  std::memcpy(out.data() + base, &length, 4);
  std::memcpy(out.data() + base + 4, &f.msg_type, 2);
  std::memcpy(out.data() + base + 6, &f.request_id, 8);
  if (!f.body.empty()) std::memcpy(out.data() + base + 14, f.body.data(), f.body.size());
}

std::optional<std::pair<Frame, std::size_t>> decode_frame(std::span<const std::uint8_t> buf,
                                                          std::size_t offset) {
  if (buf.size() - offset < 4) return std::nullopt;
  std::uint32_t length;
  std::memcpy(&length, buf.data() + offset, 4);
  if (length < 10 || length > kMaxFrameBytes) throw TransportError("malformed frame length");
  if (buf.size() - offset < 4 + static_cast<std::size_t>(length)) return std::nullopt;
  Frame f;
  std::memcpy(&f.msg_type, buf.data() + offset + 4, 2);
  std::memcpy(&f.request_id, buf.data() + offset + 6, 8);
  f.body.assign(buf.begin() + offset + 14, buf.begin() + offset + 4 + length);
  return std::make_pair(std::move(f), offset + 4 + length);
}

std::vector<std::uint8_t> encode_error_body(ErrorKind kind, const std::string& message) {
  ByteWriter w;
  w.put_u8(kind);
  w.put_string(message);
  return w.take();
}

void throw_if_error_reply(const Frame& reply) {
  if (reply.msg_type != kMsgError) return;
  ByteReader r(reply.body);
  auto kind = static_cast<ErrorKind>(r.get_u8());
  std::string msg = r.get_string();
  switch (kind) {
    case kErrInput:
      throw std::invalid_argument(msg);
    case kErrContract:
      throw ContractViolation(msg);
    default:
      throw TransportError(msg);
  }
}

// ---------------------------------------------------------------------------
// PendingReply

Frame PendingReply::await(std::chrono::milliseconds timeout) {
  if (!state_) throw std::logic_error("await on empty handle");
  std::unique_lock lock(state_->mu);
  if (state_->consumed) throw std::logic_error("await called twice on one handle");
  if (!state_->cv.wait_for(lock, timeout,
                           [&] { return state_->reply.has_value() || !state_->error.empty(); }))
    throw TransportError("rpc timeout");
  state_->consumed = true;
  if (!state_->error.empty()) throw TransportError(state_->error);
  return std::move(*state_->reply);
}

Frame PendingReply::await_ok(std::chrono::milliseconds timeout) {
  Frame f = await(timeout);
  throw_if_error_reply(f);
  return f;
}

// ---------------------------------------------------------------------------
// RpcClient

RpcClient::RpcClient(const std::string& host, std::uint16_t port,
                     std::chrono::milliseconds connect_timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || res == nullptr)
    throw TransportError("cannot resolve " + host);

  auto deadline = std::chrono::steady_clock::now() + connect_timeout;
  int fd = -1;
  for (;;) {
    fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
      ::freeaddrinfo(res);
      throw TransportError("socket() failed");
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::freeaddrinfo(res);
      throw TransportError("connect to " + host + ":" + port_str + " failed: " +
                           std::strerror(errno));
    }
    // Peer may still be starting up; retry until the deadline.
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::freeaddrinfo(res);
  set_nodelay(fd);
  fd_ = fd;
  reader_ = std::thread([this] { reader_loop(); });
}

RpcClient::~RpcClient() { close(); }

void RpcClient::close() {
  bool was_closed = closed_.exchange(true);
  if (!was_closed && fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  if (reader_.joinable()) reader_.join();
  if (!was_closed && fd_ >= 0) {
    ::close(fd_);
  }
}

PendingReply RpcClient::call_async(std::uint16_t msg_type, std::vector<std::uint8_t> body) {
  if (closed_) throw TransportError("client closed");
  Frame f;
  f.msg_type = msg_type;
  f.request_id = next_id_.fetch_add(1);
  f.body = std::move(body);

  auto state = std::make_shared<detail::PendingState>();
  {
    std::lock_guard lock(pending_mu_);
    pending_[f.request_id] = state;
  }
  {
    std::lock_guard lock(write_mu_);
    if (!write_frame(fd_, f)) {
      fail_all("connection lost on send");
    }
  }
  PendingReply r;
  r.state_ = std::move(state);
  return r;
}

Frame RpcClient::call(std::uint16_t msg_type, std::vector<std::uint8_t> body,
                      std::chrono::milliseconds timeout) {
  return call_async(msg_type, std::move(body)).await_ok(timeout);
}

void RpcClient::reader_loop() {
  for (;;) {
    auto f = read_frame(fd_);
    if (!f) {
      fail_all(closed_ ? "client closed" : "connection closed by peer");
      return;
    }
    std::shared_ptr<detail::PendingState> state;
    {
      std::lock_guard lock(pending_mu_);
      auto it = pending_.find(f->request_id);
      if (it != pending_.end()) {
        state = it->second;
        pending_.erase(it);
      }
    }
    if (state) {
      std::lock_guard lock(state->mu);
      state->reply = std::move(*f);
      state->cv.notify_all();
    }
  }
}

void RpcClient::fail_all(const std::string& why) {
  std::map<std::uint64_t, std::shared_ptr<detail::PendingState>> pending;
  {
    std::lock_guard lock(pending_mu_);
    pending.swap(pending_);
  }
  for (auto& [id, state] : pending) {
    std::lock_guard lock(state->mu);
    state->error = why;
    state->cv.notify_all();
  }
}

// ---------------------------------------------------------------------------
// RpcServer

RpcServer::RpcServer(std::uint16_t port, std::size_t workers) : num_workers_(workers) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket() failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(listen_fd_);
    throw TransportError("bind failed on port " + std::to_string(port) + ": " +
                         std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw TransportError("listen failed");
  }
}

RpcServer::~RpcServer() { stop(); }

void RpcServer::register_handler(std::uint16_t msg_type, RpcHandler handler) {
  if (running_) throw std::logic_error("register_handler after start");
  handlers_[msg_type] = std::move(handler);
}

void RpcServer::start() {
  if (running_.exchange(true)) return;
  acceptor_ = std::thread([this] { accept_loop(); });
  for (std::size_t i = 0; i < num_workers_; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

void RpcServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  // Drain the task queue and finish in-flight replies before any connection
  // closes, so graceful shutdowns never drop a reply.
  queue_cv_.notify_all();
  for (auto& t : workers_)
    if (t.joinable()) t.join();
  workers_.clear();
  {
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_)
      if (c->fd >= 0) ::shutdown(c->fd, SHUT_RDWR);
  }
  for (auto& t : conn_threads_)
    if (t.joinable()) t.join();
  conn_threads_.clear();
  std::lock_guard lock(conns_mu_);
  for (auto& c : conns_) {
    if (c->fd >= 0) ::close(c->fd);
    c->fd = -1;
  }
  conns_.clear();
}

void RpcServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;  // listen socket closed
    }
    set_nodelay(fd);
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(conns_mu_);
    conns_.push_back(conn);
    conn_threads_.emplace_back([this, conn] { connection_loop(conn); });
  }
}

void RpcServer::connection_loop(std::shared_ptr<Connection> conn) {
  for (;;) {
    auto f = read_frame(conn->fd);
    if (!f) break;  // EOF or malformed frame: drop the connection
    {
      std::lock_guard lock(queue_mu_);
      queue_.push(Task{conn, std::move(*f)});
    }
    queue_cv_.notify_one();
  }
}

void RpcServer::worker_loop() {
  for (;;) {
    Task task;
    {
      std::unique_lock lock(queue_mu_);
      queue_cv_.wait(lock, [&] { return !queue_.empty() || !running_; });
      if (queue_.empty()) {
        if (!running_) return;
        continue;
      }
      task = std::move(queue_.front());
      queue_.pop();
    }

    Frame reply;
    reply.request_id = task.request.request_id;
    auto it = handlers_.find(task.request.msg_type);
    if (it == handlers_.end()) {
      reply.msg_type = kMsgError;
      reply.body = encode_error_body(
          kErrInput, "unknown msg_type " + std::to_string(task.request.msg_type));
    } else {
      try {
        reply.body = it->second(task.request);
        reply.msg_type = task.request.msg_type;
      } catch (const std::invalid_argument& e) {
        reply.msg_type = kMsgError;
        reply.body = encode_error_body(kErrInput, e.what());
      } catch (const ContractViolation& e) {
        reply.msg_type = kMsgError;
        reply.body = encode_error_body(kErrContract, e.what());
      } catch (const std::exception& e) {
        reply.msg_type = kMsgError;
        reply.body = encode_error_body(kErrInternal, e.what());
      }
    }
    send_reply(task.conn, reply);
  }
}

void RpcServer::send_reply(const std::shared_ptr<Connection>& conn, const Frame& reply) {
  std::lock_guard lock(conn->write_mu);
  if (conn->fd >= 0) write_frame(conn->fd, reply);
}

}  // namespace minisage
