/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/collective.hpp
 * @brief Tree allreduce over trainer ranks.
 *
 * Ranks form a binary tree (children of r are 2r+1, 2r+2). Contributions flow
 * up the tree, each node combining own + left + right in that fixed order;
 * the root divides by the world size and the mean flows back down, so every
 * member receives bitwise-identical results. Cross-process edges ride
 * ALLREDUCE_SEG RPCs whose reply carries the final mean; same-process edges
 * deposit directly. All members must issue collectives in the same order.
 */
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "minisage/rpc.hpp"

namespace minisage {

class CollectiveGroup {
 public:
  /// world_size: total trainer ranks. local_begin/local_end: ranks hosted in
  /// this process. route(rank) returns the client reaching the process that
  /// hosts rank (unused for local ranks).
  CollectiveGroup(std::uint32_t world_size, std::uint32_t local_begin, std::uint32_t local_end,
                  std::function<RpcClient*(std::uint32_t)> route,
                  std::chrono::milliseconds timeout = std::chrono::seconds(60));

  /// Elementwise mean across all ranks; identical vector length required on
  /// every member. A member failure surfaces as TransportError on all
  /// members.
  std::vector<float> allreduce_mean(std::uint32_t rank, std::span<const float> values);

  /// Collective no-op.
  void barrier(std::uint32_t rank);

  /// Every member's value, by rank (u64 split into u16 limbs so the float
  /// mean is exact).
  std::vector<std::uint64_t> allgather_u64(std::uint32_t rank, std::uint64_t value);

  /// ALLREDUCE_SEG handler; register on the hosting process's RPC server.
  std::vector<std::uint8_t> handle_segment(const Frame& req);

  std::uint32_t world_size() const { return world_size_; }

 private:
  struct Slot {
    std::map<std::uint32_t, std::vector<float>> contributions;  // child rank -> partial sum
    std::vector<float> result;
    bool has_result = false;
  };

  bool is_local(std::uint32_t rank) const { return rank >= local_begin_ && rank < local_end_; }
  Slot& slot_locked(std::uint64_t seq, std::uint32_t rank);
  void deposit_contribution(std::uint64_t seq, std::uint32_t dst, std::uint32_t src,
                            std::vector<float> data);
  std::vector<float> await_contribution(std::uint64_t seq, std::uint32_t dst, std::uint32_t src);
  void publish_result(std::uint64_t seq, std::uint32_t rank, const std::vector<float>& result);
  std::vector<float> await_result(std::uint64_t seq, std::uint32_t rank);

  std::uint32_t world_size_;
  std::uint32_t local_begin_, local_end_;
  std::function<RpcClient*(std::uint32_t)> route_;
  std::chrono::milliseconds timeout_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::pair<std::uint64_t, std::uint32_t>, Slot> slots_;
  std::vector<std::uint64_t> next_seq_;  // per local rank
};

}  // namespace minisage
