/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/sampler.hpp
 * @brief Distributed recursive fan-out neighbor sampling.
 *
 * Sampling is uniform without replacement: a seed of in-degree d returns all d
 * edges when d <= k, else k of them. Each seed vertex draws from an RNG
 * derived from (global rng seed, the vertex's ORIGINAL input id, layer), and
 * CSR rows keep the input edge order in every labeling, so a mini-batch's
 * node/edge content is independent of how the graph was partitioned.
 *
 * A mini-batch is a stack of bipartite blocks, innermost (input) layer first.
 * Every block's dst list is a prefix of its src list (self-inclusion), so the
 * model can read a target vertex's previous-layer representation in place.
 */
#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "minisage/ids.hpp"
#include "minisage/local_partition.hpp"
#include "minisage/partition_book.hpp"
#include "minisage/rpc.hpp"

namespace minisage {

/// Per-layer fan-outs, innermost (input) layer first; e.g. {15, 10, 5} means
/// the first GNN layer samples up to 15 in-neighbors per target.
struct Fanouts {
  std::vector<std::uint32_t> per_layer;
  std::size_t num_layers() const { return per_layer.size(); }
};

/// Sentinel fan-out: take the full in-neighborhood (used by evaluation).
inline constexpr std::uint32_t kFullNeighborhood = std::numeric_limits<std::uint32_t>::max();

struct Block {
  std::vector<NodeId> src_nodes;  // deduplicated; dst_nodes is a prefix
  std::vector<NodeId> dst_nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // (src_idx, dst_idx)
  std::vector<EdgeId> edge_ids;  // global edge ids, parallel to edges
};

struct MiniBatchGraph {
  std::vector<Block> blocks;        // innermost first
  std::vector<NodeId> seeds;        // dst_nodes of the last block
  std::vector<NodeId> input_nodes;  // src_nodes of the first block
};

struct SampledEdge {
  NodeId src;
  NodeId dst;
  EdgeId eid;
};

/// Local fan-out sampling over one partition. Seeds are local core ids;
/// non-core seeds violate the contract. Sources may be halo vertices; all
/// returned ids are global.
std::vector<SampledEdge> sample_neighbors_local(const LocalPartition& part,
                                                std::span<const LocalId> seeds, std::uint32_t k,
                                                std::uint64_t rng_seed, std::uint32_t layer);

/// Outstanding sampling request against one partition; local backends resolve
/// immediately, RPC backends on await.
class PendingSample {
 public:
  PendingSample() = default;
  explicit PendingSample(std::vector<SampledEdge> ready) : ready_(std::move(ready)), done_(true) {}
  explicit PendingSample(PendingReply reply) : reply_(std::move(reply)) {}

  std::vector<SampledEdge> await();

 private:
  std::vector<SampledEdge> ready_;
  PendingReply reply_;
  bool done_ = false;
};

/// Dispatch target for sampling requests against one partition.
class SamplingBackend {
 public:
  virtual ~SamplingBackend() = default;
  virtual PendingSample sample_async(std::uint32_t layer, std::span<const LocalId> seeds,
                                     std::uint32_t k, std::uint64_t rng_seed) = 0;
};

/// Shared-access path: samples the co-located partition directly.
class LocalSamplingBackend : public SamplingBackend {
 public:
  explicit LocalSamplingBackend(const LocalPartition* part) : part_(part) {}
  PendingSample sample_async(std::uint32_t layer, std::span<const LocalId> seeds,
                             std::uint32_t k, std::uint64_t rng_seed) override;

 private:
  const LocalPartition* part_;
};

/// Remote path: SAMPLE{layer, seeds(local core ids), k, rng_seed} RPC.
class RpcSamplingBackend : public SamplingBackend {
 public:
  explicit RpcSamplingBackend(std::shared_ptr<RpcClient> client) : client_(std::move(client)) {}
  PendingSample sample_async(std::uint32_t layer, std::span<const LocalId> seeds,
                             std::uint32_t k, std::uint64_t rng_seed) override;

 private:
  std::shared_ptr<RpcClient> client_;
};

/// Server-side SAMPLE handler over an immutable partition; stateless across
/// requests.
RpcHandler make_sampling_handler(const LocalPartition* part);

/// Client-side stitching: groups each frontier by owning partition, issues
/// remote requests first, samples locally, then merges the results into a
/// block. Deterministic for a fixed (seed list, rng seed, partition layout).
class NeighborSampler {
 public:
  NeighborSampler(const PartitionBook* book,
                  std::vector<std::shared_ptr<SamplingBackend>> backends, PartId my_part);

  MiniBatchGraph sample_minibatch(std::span<const NodeId> seeds, const Fanouts& fanouts,
                                  std::uint64_t rng_seed) const;

 private:
  const PartitionBook* book_;
  std::vector<std::shared_ptr<SamplingBackend>> backends_;
  PartId my_part_;
};

/// Structural sanity check used by tests and debug paths: self-inclusion,
/// edge index ranges, and the frontier chain between adjacent blocks.
void validate_minibatch(const MiniBatchGraph& batch);

}  // namespace minisage
