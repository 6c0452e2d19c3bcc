/**
 *  Copyright (c) 2026 by Contributors
 * @file tests/test_rpc.cpp
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "minisage/rpc.hpp"

using namespace minisage;

TEST_CASE("frame encode/decode round trip on randomized frames") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 2000; ++trial) {
    Frame f;
    f.msg_type = static_cast<std::uint16_t>(rng());
    f.request_id = rng();
    f.body.resize(rng() % 300);
    for (auto& b : f.body) b = static_cast<std::uint8_t>(rng());

    std::vector<std::uint8_t> wire;
    // Leading garbage already decoded; frames must parse at any offset.
    std::size_t offset = rng() % 5;
    Frame pad;
    pad.body.resize(offset);
    std::vector<std::uint8_t> padded;
    if (offset > 0) encode_frame(pad, padded);
    wire = padded;
    std::size_t start = wire.size();
    encode_frame(f, wire);

    auto decoded = decode_frame(wire, start);
    REQUIRE(decoded.has_value());
    CHECK(decoded->first.msg_type == f.msg_type);
    CHECK(decoded->first.request_id == f.request_id);
    CHECK(decoded->first.body == f.body);
    CHECK(decoded->second == wire.size());
  }
}

TEST_CASE("decode_frame reports incomplete and malformed input") {
  Frame f;
  f.msg_type = kMsgPull;
  f.request_id = 7;
  f.body = {1, 2, 3};
  std::vector<std::uint8_t> wire;
  encode_frame(f, wire);
  for (std::size_t cut = 0; cut < wire.size(); ++cut) {
    std::vector<std::uint8_t> partial(wire.begin(), wire.begin() + cut);
    CHECK_FALSE(decode_frame(partial, 0).has_value());
  }
  std::vector<std::uint8_t> bad{0xff, 0xff, 0xff, 0xff, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(decode_frame(bad, 0), TransportError);
}

TEST_CASE("echo server round-trips bodies byte-exactly") {
  RpcServer server(0, 4);
  server.register_handler(kMsgControl, [](const Frame& f) { return f.body; });
  server.start();
  RpcClient client("127.0.0.1", server.port());

  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::uint8_t> body(rng() % 2000);
    for (auto& b : body) b = static_cast<std::uint8_t>(rng());
    Frame reply = client.call(kMsgControl, body);
    CHECK(reply.body == body);
    CHECK(reply.msg_type == kMsgControl);
  }
  server.stop();
}

TEST_CASE("unknown msg_type yields an error reply with matching request id") {
  RpcServer server(0, 2);
  server.register_handler(kMsgControl, [](const Frame& f) { return f.body; });
  server.start();
  RpcClient client("127.0.0.1", server.port());

  PendingReply pending = client.call_async(999, {});
  Frame reply = pending.await();
  CHECK(reply.msg_type == kMsgError);
  CHECK_THROWS_AS(throw_if_error_reply(reply), std::invalid_argument);
  server.stop();
}

TEST_CASE("handler exceptions map to typed error replies and the service continues") {
  RpcServer server(0, 2);
  server.register_handler(kMsgControl, [](const Frame& f) -> std::vector<std::uint8_t> {
    if (!f.body.empty() && f.body[0] == 1) throw std::invalid_argument("bad input");
    if (!f.body.empty() && f.body[0] == 2) throw ContractViolation("not yours");
    return {42};
  });
  server.start();
  RpcClient client("127.0.0.1", server.port());

  CHECK_THROWS_AS(client.call(kMsgControl, {1}), std::invalid_argument);
  CHECK_THROWS_AS(client.call(kMsgControl, {2}), ContractViolation);
  Frame ok = client.call(kMsgControl, {0});
  CHECK(ok.body == std::vector<std::uint8_t>{42});
  server.stop();
}

TEST_CASE("await order is independent of completion order") {
  RpcServer server(0, 4);
  server.register_handler(kMsgControl, [](const Frame& f) {
    // Body[0] encodes a delay in ms; later requests can finish first.
    if (!f.body.empty())
      std::this_thread::sleep_for(std::chrono::milliseconds(f.body[0]));
    return f.body;
  });
  server.start();
  RpcClient client("127.0.0.1", server.port());

  PendingReply slow = client.call_async(kMsgControl, {50, 'A'});
  PendingReply fast = client.call_async(kMsgControl, {0, 'B'});
  Frame a = slow.await();
  Frame b = fast.await();
  CHECK(a.body[1] == 'A');
  CHECK(b.body[1] == 'B');
  server.stop();
}

TEST_CASE("await twice on one handle is an error") {
  RpcServer server(0, 2);
  server.register_handler(kMsgControl, [](const Frame& f) { return f.body; });
  server.start();
  RpcClient client("127.0.0.1", server.port());
  PendingReply pending = client.call_async(kMsgControl, {1});
  pending.await();
  CHECK_THROWS_AS(pending.await(), std::logic_error);
  server.stop();
}

TEST_CASE("connecting to a dead endpoint fails rather than hanging") {
  std::uint16_t dead_port;
  {
    RpcServer probe(0, 1);
    dead_port = probe.port();
  }
  auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(RpcClient("127.0.0.1", dead_port, std::chrono::milliseconds(300)),
                  TransportError);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(5));
}

TEST_CASE("100 concurrent in-flight requests all answered with correct correlation") {
  RpcServer server(0, 8);
  server.register_handler(kMsgControl, [](const Frame& f) {
    ByteReader r(f.body);
    std::uint64_t x = r.get_u64();
    ByteWriter w;
    w.put_u64(x * 2 + 1);
    return w.take();
  });
  server.start();
  RpcClient client("127.0.0.1", server.port());

  constexpr int kInFlight = 100;
  std::vector<PendingReply> pending;
  std::vector<std::uint64_t> sent;
  std::mt19937_64 rng(17);
  for (int i = 0; i < kInFlight; ++i) {
    std::uint64_t x = rng() >> 2;
    sent.push_back(x);
    ByteWriter w;
    w.put_u64(x);
    pending.push_back(client.call_async(kMsgControl, w.take()));
  }
  // Await in shuffled order.
  std::vector<int> order(kInFlight);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i : order) {
    Frame reply = pending[i].await_ok();
    ByteReader r(reply.body);
    CHECK(r.get_u64() == sent[i] * 2 + 1);
  }
  server.stop();
}

TEST_CASE("concurrent multi-threaded clients see no cross-talk") {
  RpcServer server(0, 8);
  server.register_handler(kMsgControl, [](const Frame& f) { return f.body; });
  server.start();

  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      RpcClient client("127.0.0.1", server.port());
      std::mt19937_64 rng(t);
      for (int i = 0; i < 200; ++i) {
        ByteWriter w;
        w.put_u64(rng());
        auto body = w.take();
        Frame reply = client.call(kMsgControl, body);
        if (reply.body != body) ++failures;
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(failures == 0);
  server.stop();
}
