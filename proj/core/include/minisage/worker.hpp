/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/worker.hpp
 * @brief One machine slot: co-located KVStore server, sampling service,
 *        collective context, and trainer threads in a single process.
 *
 * Deployment follows the owner-compute rule: worker r serves partition r and
 * its trainers seed mini-batches from partition r's training vertices, so most
 * sampling and feature traffic stays local. Dense gradients synchronize every
 * iteration through the tree allreduce; sparse embedding gradients are pushed
 * asynchronously (Hogwild) and drained at epoch boundaries.
 */
#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "minisage/collective.hpp"
#include "minisage/gnn.hpp"
#include "minisage/kvstore.hpp"
#include "minisage/local_partition.hpp"
#include "minisage/partition_book.hpp"
#include "minisage/rpc.hpp"
#include "minisage/sampler.hpp"
#include "minisage/synthetic.hpp"
#include "minisage/trainer.hpp"

namespace minisage {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string part_dir;  // partition directory for the rank at this endpoint
};

/// Cluster config file: one line per machine rank, `host port part_dir`.
std::vector<Endpoint> read_cluster_config(const std::string& path);
void write_cluster_config(const std::string& path, const std::vector<Endpoint>& endpoints);

/// Binds an ephemeral listening socket to reserve a port number, then frees it.
std::uint16_t pick_free_port();

struct WorkerConfig {
  PartId rank = 0;
  std::uint32_t trainers_per_machine = 1;
  std::vector<Endpoint> endpoints;  // one per machine; size = machine count
  std::string data_dir;             // dataset directory (gen output)

  Fanouts fanouts{{15, 10, 5}};
  std::uint32_t hidden = 256;
  std::uint32_t batch_size = 2000;
  std::uint32_t epochs = 1;
  float lr = 0.003f;
  float momentum = 0.9f;
  bool embed_mode = false;          // featureless: learnable sparse embeddings
  std::uint32_t embed_dim = 16;
  float sparse_lr = 0.05f;
  std::uint64_t seed = 1;
  std::string metrics_out;
  std::uint32_t eval_every = 1;     // 0 disables evaluation
  bool debug_checksums = false;     // verify replica consistency every step
  std::uint32_t prefetch_depth = 2;
  std::uint32_t push_inflight = 16;
  std::uint32_t server_workers = 16;
  std::uint32_t eval_batch = 1024;

  std::uint32_t num_machines() const { return static_cast<std::uint32_t>(endpoints.size()); }
  std::uint32_t world_size() const { return num_machines() * trainers_per_machine; }
};

struct WorkerResult {
  std::vector<EpochStats> epochs;   // globally aggregated, one per epoch
  double final_val_acc = -1.0;
  double final_test_acc = -1.0;
};

class Worker {
 public:
  explicit Worker(WorkerConfig cfg);
  ~Worker();

  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  /// Runs the whole training job (connect, register, epochs, teardown).
  WorkerResult run();

  std::uint16_t port() const { return server_->port(); }
  const PartitionBook& book() const { return book_; }
  const LocalPartition& partition() const { return part_; }

 private:
  struct TrainerContext;

  void connect_peers();
  void setup_tensors();
  void trainer_main(std::uint32_t local_trainer, WorkerResult* result);
  EpochStats run_epoch(TrainerContext& ctx, std::uint32_t epoch);
  double evaluate(TrainerContext& ctx, std::uint8_t which_split);

  WorkerConfig cfg_;
  LocalPartition part_;
  PartitionBook book_;
  SyntheticDataset dataset_;
  std::vector<std::uint8_t> train_mask_;     // by relabeled id
  std::vector<NodeId> val_ids_, test_ids_;   // relabeled
  WorkloadSplit split_;
  std::vector<std::uint64_t> shard_batches_; // per global rank

  std::unique_ptr<KVServer> kv_server_;
  std::unique_ptr<RpcServer> server_;
  std::unique_ptr<CollectiveGroup> collective_;
  std::vector<std::shared_ptr<RpcClient>> peers_;  // per machine; own slot null
  std::unique_ptr<KVStoreClient> kv_client_;
  std::unique_ptr<NeighborSampler> sampler_;

  std::string feat_tensor_;
  std::atomic<bool> failed_{false};
};

}  // namespace minisage
