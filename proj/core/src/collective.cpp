/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/collective.cpp
 */
#include "minisage/collective.hpp"

#include <cmath>
#include <stdexcept>

namespace minisage {

namespace {

std::vector<std::uint8_t> encode_segment(std::uint64_t seq, std::uint32_t dst, std::uint32_t src,
                                         std::span<const float> data) {
  ByteWriter w;
  w.put_u64(seq);
  w.put_u32(dst);
  w.put_u32(src);
  w.put_array<float>(data);
  return w.take();
}

}  // namespace

CollectiveGroup::CollectiveGroup(std::uint32_t world_size, std::uint32_t local_begin,
                                 std::uint32_t local_end,
                                 std::function<RpcClient*(std::uint32_t)> route,
                                 std::chrono::milliseconds timeout)
    : world_size_(world_size),
      local_begin_(local_begin),
      local_end_(local_end),
      route_(std::move(route)),
      timeout_(timeout),
      next_seq_(local_end - local_begin, 0) {
  if (world_size_ == 0 || local_begin_ > local_end_ || local_end_ > world_size_)
    throw std::invalid_argument("bad collective group layout");
}

CollectiveGroup::Slot& CollectiveGroup::slot_locked(std::uint64_t seq, std::uint32_t rank) {
  return slots_[{seq, rank}];
}

void CollectiveGroup::deposit_contribution(std::uint64_t seq, std::uint32_t dst,
                                           std::uint32_t src, std::vector<float> data) {
  std::lock_guard lock(mu_);
  slot_locked(seq, dst).contributions.emplace(src, std::move(data));
  cv_.notify_all();
}

std::vector<float> CollectiveGroup::await_contribution(std::uint64_t seq, std::uint32_t dst,
                                                       std::uint32_t src) {
  std::unique_lock lock(mu_);
  bool ok = cv_.wait_for(lock, timeout_, [&] {
    auto it = slots_.find({seq, dst});
    return it != slots_.end() && it->second.contributions.count(src) > 0;
  });
  if (!ok)
    throw TransportError("allreduce: missing contribution from rank " + std::to_string(src));
  Slot& slot = slots_[{seq, dst}];
  std::vector<float> data = std::move(slot.contributions[src]);
  slot.contributions.erase(src);
  return data;
}

void CollectiveGroup::publish_result(std::uint64_t seq, std::uint32_t rank,
                                     const std::vector<float>& result) {
  std::lock_guard lock(mu_);
  Slot& slot = slot_locked(seq, rank);
  slot.result = result;
  slot.has_result = true;
  cv_.notify_all();
}

std::vector<float> CollectiveGroup::await_result(std::uint64_t seq, std::uint32_t rank) {
  std::unique_lock lock(mu_);
  bool ok = cv_.wait_for(lock, timeout_, [&] {
    auto it = slots_.find({seq, rank});
    return it != slots_.end() && it->second.has_result;
  });
  if (!ok) throw TransportError("allreduce: result never arrived for rank " + std::to_string(rank));
  auto it = slots_.find({seq, rank});
  std::vector<float> out = std::move(it->second.result);
  if (it->second.contributions.empty()) slots_.erase(it);
  return out;
}

std::vector<float> CollectiveGroup::allreduce_mean(std::uint32_t rank,
                                                   std::span<const float> values) {
  if (!is_local(rank)) throw std::logic_error("allreduce called for a non-local rank");
  std::uint64_t seq;
  {
    std::lock_guard lock(mu_);
    seq = next_seq_[rank - local_begin_]++;
  }

  // Upward phase: own + left + right, fixed order.
  std::vector<float> sum(values.begin(), values.end());
  for (std::uint32_t child : {2 * rank + 1, 2 * rank + 2}) {
    if (child >= world_size_) continue;
    std::vector<float> part = await_contribution(seq, rank, child);
    if (part.size() != sum.size()) throw TransportError("allreduce length mismatch");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part[i];
  }

  std::vector<float> result;
  if (rank == 0) {
    result = std::move(sum);
    const float inv = 1.0f / static_cast<float>(world_size_);
    for (float& x : result) x *= inv;
  } else {
    const std::uint32_t parent = (rank - 1) / 2;
    if (is_local(parent)) {
      deposit_contribution(seq, parent, rank, std::move(sum));
      result = await_result(seq, rank);
    } else {
      RpcClient* client = route_(parent);
      Frame reply = client->call_async(kMsgAllreduceSeg, encode_segment(seq, parent, rank, sum))
                        .await_ok(timeout_);
      ByteReader r(reply.body);
      result = r.get_array<float>();
      if (result.size() != values.size()) throw TransportError("allreduce length mismatch");
    }
  }

  // Downward phase: hand the mean to both subtrees.
  for (std::uint32_t child : {2 * rank + 1, 2 * rank + 2}) {
    if (child >= world_size_) continue;
    publish_result(seq, child, result);
  }
  return result;
}

void CollectiveGroup::barrier(std::uint32_t rank) {
  float zero = 0.0f;
  allreduce_mean(rank, std::span<const float>(&zero, 1));
}

std::vector<std::uint64_t> CollectiveGroup::allgather_u64(std::uint32_t rank,
                                                          std::uint64_t value) {
  // u16 limbs stay exact through float32 summation and the mean round-trip.
  std::vector<float> v(4 * static_cast<std::size_t>(world_size_), 0.0f);
  for (int j = 0; j < 4; ++j)
    v[rank * 4 + j] = static_cast<float>((value >> (16 * j)) & 0xffffULL);
  std::vector<float> mean = allreduce_mean(rank, v);
  std::vector<std::uint64_t> out(world_size_, 0);
  for (std::uint32_t r = 0; r < world_size_; ++r) {
    for (int j = 0; j < 4; ++j) {
      auto limb = static_cast<std::uint64_t>(
          std::llround(static_cast<double>(mean[r * 4 + j]) * world_size_));
      out[r] |= limb << (16 * j);
    }
  }
  return out;
}

std::vector<std::uint8_t> CollectiveGroup::handle_segment(const Frame& req) {
  ByteReader r(req.body);
  std::uint64_t seq = r.get_u64();
  std::uint32_t dst = r.get_u32();
  std::uint32_t src = r.get_u32();
  auto data = r.get_array<float>();
  if (!is_local(dst)) throw ContractViolation("allreduce segment for a rank not hosted here");
  deposit_contribution(seq, dst, src, std::move(data));
  // Reply once the subtree root's downward pass publishes src's result.
  std::vector<float> result = await_result(seq, src);
  ByteWriter w;
  w.put_array<float>(result);
  return w.take();
}

}  // namespace minisage
