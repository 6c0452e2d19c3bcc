/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/kvstore.hpp
 * @brief Distributed in-memory tensor store sharded by the partition book.
 *
 * Each machine slot hosts one KVServer holding the rows its partition owns
 * (core rows only; halo features are never duplicated, a pull for them goes to
 * the owner). Trainers co-located with a server read local rows through the
 * fast path without touching the wire; remote rows move via PULL/PUSH RPCs.
 * Trainable shards carry per-row optimizer state and apply sparse updates
 * server-side under per-row atomicity (Hogwild: no cross-trainer ordering).
 */
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "minisage/dense_matrix.hpp"
#include "minisage/ids.hpp"
#include "minisage/partition_book.hpp"
#include "minisage/rpc.hpp"

namespace minisage {

enum class PolicyKind : std::uint8_t { kNode = 0, kEdge = 1 };

/// Maps a global ID to its owning server via the partition book.
struct PartitionPolicy {
  PolicyKind kind = PolicyKind::kNode;
  const PartitionBook* book = nullptr;

  PartId owner(std::uint64_t gid) const {
    return kind == PolicyKind::kNode ? book->node_owner(gid) : book->edge_owner(gid);
  }
  std::uint64_t range_start(PartId p) const {
    return kind == PolicyKind::kNode ? book->node_range_starts[p] : book->edge_range_starts[p];
  }
  std::uint64_t part_rows(PartId p) const {
    return kind == PolicyKind::kNode ? book->part_num_nodes(p) : book->part_num_edges(p);
  }
  std::uint64_t total() const {
    return kind == PolicyKind::kNode ? book->num_nodes() : book->num_edges();
  }
};

enum class InitKind : std::uint8_t { kZero = 0, kUniform = 1 };

enum class SparseOptKind : std::uint8_t { kSgd = 0, kAdagrad = 1 };

struct SparseOptimizerSpec {
  SparseOptKind kind = SparseOptKind::kSgd;
  float learning_rate = 0.01f;
  float adagrad_eps = 1e-10f;
};

struct TensorSpec {
  std::string name;
  PolicyKind policy = PolicyKind::kNode;
  std::uint32_t dim = 0;
  InitKind init = InitKind::kZero;
  float init_lo = 0.0f;
  float init_hi = 0.0f;
  bool trainable = false;
  SparseOptimizerSpec optimizer;  // meaningful iff trainable
  std::uint64_t seed = 0;

  void encode(ByteWriter& w) const;
  static TensorSpec decode(ByteReader& r);
};

/// One server's shard of a registered tensor. Row i holds the data of global
/// id range_start + i.
struct TensorShard {
  TensorSpec spec;
  std::uint64_t row_start = 0;
  DenseMatrix rows;
  DenseMatrix optimizer_state;  // adagrad accumulators; allocated iff trainable
};

class KVServer {
 public:
  KVServer(PartId part, const PartitionBook* book);

  /// Allocates the local shard. Uniform init is seeded per
  /// (seed, server, name) so every deployment reproduces the same rows.
  void register_tensor(const TensorSpec& spec);

  bool has_tensor(const std::string& name) const;
  const TensorSpec& spec(const std::string& name) const;

  /// Copies owned rows into dst (one per id); ids must be owned here.
  void read_rows(const std::string& name, std::span<const std::uint64_t> ids, float* dst) const;

  /// Applies the registered optimizer row by row. ids must be owned here and
  /// the tensor trainable. Rows update atomically (striped locks).
  void apply_push(const std::string& name, std::span<const std::uint64_t> ids,
                  const float* grads, std::uint64_t dim);

  /// Setup-phase bulk load of core rows: row i <- source[source_row_of(i)].
  void load_rows(const std::string& name, const DenseMatrix& source,
                 std::span<const NodeId> source_row_of);

  /// Zero-copy view of one locally stored row (fast path).
  std::span<const float> row_view(const std::string& name, std::uint64_t local_row) const;

  PartId part() const { return part_; }

  /// RPC handler entry points (wire formats documented in rpc.hpp).
  std::vector<std::uint8_t> handle_pull(const Frame& req) const;
  std::vector<std::uint8_t> handle_push(const Frame& req);
  std::vector<std::uint8_t> handle_register(const Frame& req);

 private:
  TensorShard& shard(const std::string& name);
  const TensorShard& shard(const std::string& name) const;
  std::mutex& row_lock(std::uint64_t row) const;

  PartId part_;
  const PartitionBook* book_;
  std::unordered_map<std::string, std::unique_ptr<TensorShard>> tensors_;
  mutable std::vector<std::mutex> stripes_;
};

/// Client used by the trainers of one machine slot. Local ids resolve through
/// the co-located server without serialization; remote groups are issued
/// concurrently, remote-first.
class KVStoreClient {
 public:
  KVStoreClient(PartId my_part, const PartitionBook* book, KVServer* local_server,
                std::vector<std::shared_ptr<RpcClient>> peers /* indexed by part */);

  /// Broadcasts REGISTER to every server (including the local one).
  void register_everywhere(const TensorSpec& spec);

  /// Gathers rows for ids (duplicates allowed; row order matches ids order).
  DenseMatrix pull(const std::string& name, std::span<const std::uint64_t> ids) const;

  /// Sparse update. Duplicate ids are pre-aggregated (summed) before the
  /// optimizer applies. Blocks until all servers acked.
  void push(const std::string& name, std::span<const std::uint64_t> ids,
            const DenseMatrix& grads) const;

  /// Fire-and-forget variant: local rows update inline, remote pushes return
  /// pending handles the caller drains later.
  std::vector<PendingReply> push_async(const std::string& name,
                                       std::span<const std::uint64_t> ids,
                                       const DenseMatrix& grads) const;

  /// Local fast path: ids must be owned by the co-located server, otherwise
  /// ContractViolation. Byte-identical to pull of the same ids.
  DenseMatrix local_fast_path(const std::string& name,
                              std::span<const std::uint64_t> ids) const;

  std::uint32_t dim_of(const std::string& name) const;

 private:
  struct Groups;
  PartId my_part_;
  const PartitionBook* book_;
  KVServer* local_;
  std::vector<std::shared_ptr<RpcClient>> peers_;
};

}  // namespace minisage
