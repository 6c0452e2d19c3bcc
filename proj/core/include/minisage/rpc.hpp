/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/rpc.hpp
 * @brief Length-prefixed binary RPC over localhost TCP.
 *
 * Wire format (all little-endian):
 *   length: u32   -- byte length of msg_type + request_id + body
 *   msg_type: u16
 *   request_id: u64
 *   body: raw bytes
 *
 * Message type registry:
 *   ERROR=0 (replies only), PULL=1, PUSH=2, REGISTER=3, SAMPLE=4,
 *   ALLREDUCE_SEG=5, CONTROL=6.
 *
 * Replies carry the request's id and msg_type; error replies use ERROR with a
 * body of {kind:u8, message:string}. Bodies carry raw row-major float buffers
 * and integer arrays with no per-element transformation.
 */
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <thread>
#include <vector>

#include "minisage/bytes.hpp"
#include "minisage/ids.hpp"

namespace minisage {

enum MsgType : std::uint16_t {
  kMsgError = 0,
  kMsgPull = 1,
  kMsgPush = 2,
  kMsgRegister = 3,
  kMsgSample = 4,
  kMsgAllreduceSeg = 5,
  kMsgControl = 6,
};

// Error kinds carried in ERROR reply bodies; the client rethrows the
// matching exception type.
enum ErrorKind : std::uint8_t {
  kErrInput = 1,
  kErrContract = 2,
  kErrInternal = 3,
};

struct Frame {
  std::uint16_t msg_type = 0;
  std::uint64_t request_id = 0;
  std::vector<std::uint8_t> body;
};

inline constexpr std::uint32_t kMaxFrameBytes = 1u << 30;
inline constexpr auto kDefaultRpcTimeout = std::chrono::seconds(30);

/// Appends the encoded frame to out.
void encode_frame(const Frame& f, std::vector<std::uint8_t>& out);

/// Decodes one frame from buf starting at offset. Returns the frame and the
/// new offset, or nullopt if buf holds an incomplete frame. Throws
/// TransportError on a malformed frame (oversized or short length).
std::optional<std::pair<Frame, std::size_t>> decode_frame(
    std::span<const std::uint8_t> buf, std::size_t offset);

/// Throws the exception encoded in an ERROR reply; no-op for other frames.
void throw_if_error_reply(const Frame& reply);

std::vector<std::uint8_t> encode_error_body(ErrorKind kind, const std::string& message);

class RpcClient;

namespace detail {
struct PendingState {
  std::mutex mu;
  std::condition_variable cv;
  std::optional<Frame> reply;
  std::string error;  // non-empty on transport failure
  bool consumed = false;
};
}  // namespace detail

/// Handle for one in-flight request. await() may be called exactly once.
class PendingReply {
 public:
  PendingReply() = default;

  /// Blocks until the reply arrives. Throws TransportError on timeout or
  /// connection loss, std::logic_error if awaited twice.
  Frame await(std::chrono::milliseconds timeout =
                  std::chrono::duration_cast<std::chrono::milliseconds>(kDefaultRpcTimeout));

  /// await() followed by throw_if_error_reply().
  Frame await_ok(std::chrono::milliseconds timeout =
                     std::chrono::duration_cast<std::chrono::milliseconds>(kDefaultRpcTimeout));

  bool valid() const { return state_ != nullptr; }

 private:
  friend class RpcClient;
  std::shared_ptr<detail::PendingState> state_;
};

/// Thread-safe client holding one persistent connection. call_async may be
/// issued from multiple threads; replies are correlated by request id, so
/// await order is independent of completion order.
class RpcClient {
 public:
  RpcClient(const std::string& host, std::uint16_t port,
            std::chrono::milliseconds connect_timeout =
                std::chrono::duration_cast<std::chrono::milliseconds>(kDefaultRpcTimeout));
  ~RpcClient();

  RpcClient(const RpcClient&) = delete;
  RpcClient& operator=(const RpcClient&) = delete;

  PendingReply call_async(std::uint16_t msg_type, std::vector<std::uint8_t> body);

  /// call_async + await_ok.
  Frame call(std::uint16_t msg_type, std::vector<std::uint8_t> body,
             std::chrono::milliseconds timeout =
                 std::chrono::duration_cast<std::chrono::milliseconds>(kDefaultRpcTimeout));

  void close();

 private:
  void reader_loop();
  void fail_all(const std::string& why);

  int fd_ = -1;
  std::thread reader_;
  std::mutex write_mu_;
  std::mutex pending_mu_;
  std::map<std::uint64_t, std::shared_ptr<detail::PendingState>> pending_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<bool> closed_{false};
};

/// Handler: request frame -> reply body. Throwing std::invalid_argument maps
/// to an ERROR(kErrInput) reply, ContractViolation to kErrContract, anything
/// else to kErrInternal; the connection stays up either way.
using RpcHandler = std::function<std::vector<std::uint8_t>(const Frame&)>;

class RpcServer {
 public:
  /// Binds and listens on 127.0.0.1:port (port 0 picks an ephemeral port).
  /// Handlers run on a bounded pool of `workers` threads and must be
  /// reentrant.
  explicit RpcServer(std::uint16_t port = 0, std::size_t workers = 16);
  ~RpcServer();

  RpcServer(const RpcServer&) = delete;
  RpcServer& operator=(const RpcServer&) = delete;

  void register_handler(std::uint16_t msg_type, RpcHandler handler);

  void start();
  void stop();

  std::uint16_t port() const { return port_; }

 private:
  struct Connection {
    int fd = -1;
    std::mutex write_mu;
  };

  void accept_loop();
  void connection_loop(std::shared_ptr<Connection> conn);
  void worker_loop();
  void send_reply(const std::shared_ptr<Connection>& conn, const Frame& reply);

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::map<std::uint16_t, RpcHandler> handlers_;
  std::thread acceptor_;
  std::vector<std::thread> workers_;
  std::size_t num_workers_;

  struct Task {
    std::shared_ptr<Connection> conn;
    Frame request;
  };
  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::queue<Task> queue_;

  std::mutex conns_mu_;
  std::vector<std::shared_ptr<Connection>> conns_;
  std::vector<std::thread> conn_threads_;
  std::atomic<bool> running_{false};
};

}  // namespace minisage
