/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/sampler.cpp
 */
#include "minisage/sampler.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "minisage/rng.hpp"

namespace minisage {

namespace {

// Salt separating the sampler's RNG stream from other seed consumers.
constexpr std::uint64_t kSamplerSalt = 0x5a3c9d17b42e6f08ULL;

std::vector<std::uint8_t> encode_sample_request(std::uint32_t layer,
                                                std::span<const LocalId> seeds, std::uint32_t k,
                                                std::uint64_t rng_seed) {
  ByteWriter w;
  w.put_u32(layer);
  w.put_u32(k);
  w.put_u64(rng_seed);
  w.put_array<LocalId>(seeds);
  return w.take();
}

std::vector<std::uint8_t> encode_sample_reply(const std::vector<SampledEdge>& edges) {
  ByteWriter w;
  w.put_u64(edges.size());
  for (const auto& e : edges) {
    w.put_u64(e.src);
    w.put_u64(e.dst);
    w.put_u64(e.eid);
  }
  return w.take();
}

std::vector<SampledEdge> decode_sample_reply(const Frame& reply) {
  ByteReader r(reply.body);
  std::uint64_t n = r.get_u64();
  std::vector<SampledEdge> edges(n);
  for (auto& e : edges) {
    e.src = r.get_u64();
    e.dst = r.get_u64();
    e.eid = r.get_u64();
  }
  return edges;
}

}  // namespace

std::vector<SampledEdge> sample_neighbors_local(const LocalPartition& part,
                                                std::span<const LocalId> seeds, std::uint32_t k,
                                                std::uint64_t rng_seed, std::uint32_t layer) {
  if (k == 0) throw std::invalid_argument("fan-out must be >= 1");
  std::vector<SampledEdge> out;
  std::vector<std::uint32_t> positions;
  for (LocalId seed : seeds) {
    if (seed >= part.local_to_global.size())
      throw ContractViolation("sampling seed out of range");
    if (part.is_halo(seed))
      throw ContractViolation("sampling seed is a halo vertex, not core");

    const NodeId dst_gid = part.global_of(seed);
    auto srcs = part.local_graph.in_neighbors(seed);
    auto eids = part.local_graph.in_edge_ids(seed);
    const std::uint64_t degree = srcs.size();

    auto emit = [&](std::uint64_t pos) {
      out.push_back({part.global_of(srcs[pos]), dst_gid,
                     part.edge_local_to_global[eids[pos]]});
    };

    if (degree <= k) {
      for (std::uint64_t i = 0; i < degree; ++i) emit(i);
      continue;
    }

    // Uniform without replacement: partial Fisher-Yates over row positions.
    // The RNG is keyed by the vertex's original id, and row order is the
    // input edge order in every labeling, so the chosen edge set does not
    // depend on the partition layout.
    Rng rng(mix_seed(mix_seed(rng_seed, kSamplerSalt), part.node_orig_ids[seed], layer));
    positions.resize(degree);
    for (std::uint64_t i = 0; i < degree; ++i) positions[i] = static_cast<std::uint32_t>(i);
    for (std::uint32_t i = 0; i < k; ++i) {
      std::uint64_t j = i + rng.next_below(degree - i);
      std::swap(positions[i], positions[j]);
      emit(positions[i]);
    }
  }
  return out;
}

std::vector<SampledEdge> PendingSample::await() {
  if (done_) return std::move(ready_);
  Frame reply = reply_.await_ok();
  return decode_sample_reply(reply);
}

PendingSample LocalSamplingBackend::sample_async(std::uint32_t layer,
                                                 std::span<const LocalId> seeds, std::uint32_t k,
                                                 std::uint64_t rng_seed) {
  return PendingSample(sample_neighbors_local(*part_, seeds, k, rng_seed, layer));
}

PendingSample RpcSamplingBackend::sample_async(std::uint32_t layer,
                                               std::span<const LocalId> seeds, std::uint32_t k,
                                               std::uint64_t rng_seed) {
  return PendingSample(
      client_->call_async(kMsgSample, encode_sample_request(layer, seeds, k, rng_seed)));
}

RpcHandler make_sampling_handler(const LocalPartition* part) {
  return [part](const Frame& req) {
    ByteReader r(req.body);
    std::uint32_t layer = r.get_u32();
    std::uint32_t k = r.get_u32();
    std::uint64_t rng_seed = r.get_u64();
    auto seeds = r.get_array<LocalId>();
    return encode_sample_reply(sample_neighbors_local(*part, seeds, k, rng_seed, layer));
  };
}

NeighborSampler::NeighborSampler(const PartitionBook* book,
                                 std::vector<std::shared_ptr<SamplingBackend>> backends,
                                 PartId my_part)
    : book_(book), backends_(std::move(backends)), my_part_(my_part) {
  if (backends_.size() != book_->num_parts)
    throw std::invalid_argument("one sampling backend per partition required");
}

MiniBatchGraph NeighborSampler::sample_minibatch(std::span<const NodeId> seeds,
                                                 const Fanouts& fanouts,
                                                 std::uint64_t rng_seed) const {
  if (seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
  if (fanouts.num_layers() == 0) throw std::invalid_argument("at least one layer required");

  // Frontier deduplication: a vertex targeted via multiple paths is sampled
  // once per layer.
  std::vector<NodeId> frontier;
  std::unordered_map<NodeId, std::uint32_t> frontier_index;
  for (NodeId s : seeds) {
    if (frontier_index.emplace(s, frontier.size()).second) frontier.push_back(s);
  }

  std::vector<Block> blocks;  // built outermost first, reversed at the end
  blocks.reserve(fanouts.num_layers());

  for (std::size_t layer_pos = fanouts.num_layers(); layer_pos-- > 0;) {
    const std::uint32_t layer = static_cast<std::uint32_t>(layer_pos);
    const std::uint32_t k = fanouts.per_layer[layer_pos];

    std::vector<std::vector<LocalId>> groups(book_->num_parts);
    for (NodeId gid : frontier) {
      auto [p, local] = book_->node_local(gid);
      groups[p].push_back(local);
    }

    // Remote requests go out first so their flight overlaps local sampling.
    std::vector<PendingSample> pending;
    for (PartId p = 0; p < book_->num_parts; ++p) {
      if (p == my_part_ || groups[p].empty()) continue;
      pending.push_back(backends_[p]->sample_async(layer, groups[p], k, rng_seed));
    }
    std::vector<SampledEdge> edges;
    if (!groups[my_part_].empty())
      edges = backends_[my_part_]->sample_async(layer, groups[my_part_], k, rng_seed).await();
    for (auto& h : pending) {
      auto remote = h.await();
      edges.insert(edges.end(), remote.begin(), remote.end());
    }

    // Canonical order (dst position, original edge id): deterministic and
    // independent of which partition answered.
    struct Key {
      std::uint32_t dst_pos;
      EdgeId orig_eid;
      std::size_t index;
    };
    std::vector<Key> order(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i)
      order[i] = {frontier_index.at(edges[i].dst), book_->edge_perm_inv[edges[i].eid], i};
    std::sort(order.begin(), order.end(), [](const Key& a, const Key& b) {
      return a.dst_pos != b.dst_pos ? a.dst_pos < b.dst_pos : a.orig_eid < b.orig_eid;
    });

    Block block;
    block.dst_nodes = frontier;
    block.src_nodes = frontier;  // self-inclusion: dst is a prefix of src
    auto src_index = frontier_index;
    block.edges.reserve(edges.size());
    block.edge_ids.reserve(edges.size());
    for (const Key& key : order) {
      const SampledEdge& e = edges[key.index];
      auto [it, inserted] = src_index.emplace(e.src, block.src_nodes.size());
      if (inserted) block.src_nodes.push_back(e.src);
      block.edges.emplace_back(it->second, key.dst_pos);
      block.edge_ids.push_back(e.eid);
    }

    frontier = block.src_nodes;
    frontier_index = std::move(src_index);
    blocks.push_back(std::move(block));
  }

  MiniBatchGraph batch;
  std::reverse(blocks.begin(), blocks.end());
  batch.blocks = std::move(blocks);
  batch.seeds = batch.blocks.back().dst_nodes;
  batch.input_nodes = batch.blocks.front().src_nodes;
  return batch;
}

void validate_minibatch(const MiniBatchGraph& batch) {
  if (batch.blocks.empty()) throw std::logic_error("empty mini-batch");
  for (std::size_t l = 0; l < batch.blocks.size(); ++l) {
    const Block& b = batch.blocks[l];
    if (b.dst_nodes.size() > b.src_nodes.size())
      throw std::logic_error("dst list longer than src list");
    for (std::size_t i = 0; i < b.dst_nodes.size(); ++i)
      if (b.src_nodes[i] != b.dst_nodes[i])
        throw std::logic_error("dst list is not a prefix of src list");
    if (b.edges.size() != b.edge_ids.size())
      throw std::logic_error("edge id array size mismatch");
    for (auto [s, d] : b.edges)
      if (s >= b.src_nodes.size() || d >= b.dst_nodes.size())
        throw std::logic_error("edge index out of range");
    if (l + 1 < batch.blocks.size() && b.dst_nodes != batch.blocks[l + 1].src_nodes)
      throw std::logic_error("adjacent blocks do not chain");
  }
  if (batch.seeds != batch.blocks.back().dst_nodes)
    throw std::logic_error("seeds do not match last block");
  if (batch.input_nodes != batch.blocks.front().src_nodes)
    throw std::logic_error("input nodes do not match first block");
}

}  // namespace minisage
