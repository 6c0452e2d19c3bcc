/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/worker.cpp
 */
#include "minisage/worker.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "minisage/rng.hpp"

namespace minisage {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a_bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t params_checksum(const SageParams& params) {
  std::vector<float> flat(params.num_params());
  params.to_flat(flat);
  return fnv1a_bytes(flat.data(), flat.size() * sizeof(float));
}

// Bounded single-producer prefetch queue; batches come out in issue order.
class BatchPrefetcher {
 public:
  BatchPrefetcher(std::function<MiniBatchGraph(std::size_t)> produce, std::size_t num_batches,
                  std::size_t depth)
      : produce_(std::move(produce)), num_batches_(num_batches), depth_(std::max<std::size_t>(depth, 1)) {
    thread_ = std::thread([this] { producer(); });
  }

  ~BatchPrefetcher() {
    {
      std::lock_guard lock(mu_);
      cancelled_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  MiniBatchGraph pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || !error_.empty(); });
    if (queue_.empty()) throw TransportError("sampling pipeline failed: " + error_);
    MiniBatchGraph batch = std::move(queue_.front());
    queue_.pop_front();
    cv_.notify_all();
    return batch;
  }

 private:
  void producer() {
    try {
      for (std::size_t b = 0; b < num_batches_; ++b) {
        MiniBatchGraph batch = produce_(b);
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return queue_.size() < depth_ || cancelled_; });
        if (cancelled_) return;
        queue_.push_back(std::move(batch));
        cv_.notify_all();
      }
    } catch (const std::exception& e) {
      std::lock_guard lock(mu_);
      error_ = e.what();
      cv_.notify_all();
    }
  }

  std::function<MiniBatchGraph(std::size_t)> produce_;
  std::size_t num_batches_;
  std::size_t depth_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<MiniBatchGraph> queue_;
  std::string error_;
  bool cancelled_ = false;
};

}  // namespace

std::vector<Endpoint> read_cluster_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open cluster config: " + path);
  std::vector<Endpoint> out;
  std::string host, part_dir;
  std::uint32_t port;
  while (in >> host >> port >> part_dir) out.push_back({host, static_cast<std::uint16_t>(port), part_dir});
  return out;
}

void write_cluster_config(const std::string& path, const std::vector<Endpoint>& endpoints) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write cluster config: " + path);
  for (const auto& e : endpoints) out << e.host << ' ' << e.port << ' ' << e.part_dir << '\n';
}

std::uint16_t pick_free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw TransportError("bind failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  std::uint16_t port = ntohs(addr.sin_port);
  ::close(fd);
  return port;
}

struct Worker::TrainerContext {
  std::uint32_t local_trainer = 0;
  std::uint32_t global_rank = 0;
  SageParams params;
  DenseSgd opt{0.0f, 0.0f};
  std::vector<NodeId> shard;
  std::deque<PendingReply> push_queue;
  // Raw per-epoch counters feeding the global locality fraction.
  std::uint64_t epoch_local_inputs = 0;
  std::uint64_t epoch_total_inputs = 0;
};

Worker::Worker(WorkerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoints.empty()) throw std::invalid_argument("no endpoints configured");
  if (cfg_.rank >= cfg_.num_machines()) throw std::invalid_argument("rank out of range");

  const std::string& part_dir = cfg_.endpoints[cfg_.rank].part_dir;
  part_ = LocalPartition::load((fs::path(part_dir) / "graph.bin").string());
  book_ = PartitionBook::load((fs::path(part_dir) / "book.bin").string());
  if (book_.num_parts != cfg_.num_machines())
    throw std::invalid_argument("partition count does not match machine count");
  dataset_ = load_dataset(cfg_.data_dir);
  if (dataset_.num_nodes != book_.num_nodes())
    throw std::invalid_argument("dataset does not match partition book");

  train_mask_.assign(dataset_.num_nodes, 0);
  for (NodeId orig = 0; orig < dataset_.num_nodes; ++orig) {
    NodeId g = book_.node_perm[orig];
    if (dataset_.split[orig] == 0) train_mask_[g] = 1;
    if (dataset_.split[orig] == 1) val_ids_.push_back(g);
    if (dataset_.split[orig] == 2) test_ids_.push_back(g);
  }
  std::sort(val_ids_.begin(), val_ids_.end());
  std::sort(test_ids_.begin(), test_ids_.end());

  split_ = split_training_set(book_, train_mask_, cfg_.trainers_per_machine);
  shard_batches_.resize(split_.shards.size());
  for (std::size_t r = 0; r < split_.shards.size(); ++r)
    shard_batches_[r] = (split_.shards[r].size() + cfg_.batch_size - 1) / cfg_.batch_size;

  kv_server_ = std::make_unique<KVServer>(cfg_.rank, &book_);
  server_ = std::make_unique<RpcServer>(cfg_.endpoints[cfg_.rank].port, cfg_.server_workers);
  collective_ = std::make_unique<CollectiveGroup>(
      cfg_.world_size(), cfg_.rank * cfg_.trainers_per_machine,
      (cfg_.rank + 1) * cfg_.trainers_per_machine, [this](std::uint32_t rank) -> RpcClient* {
        return peers_[rank / cfg_.trainers_per_machine].get();
      });

  server_->register_handler(kMsgPull,
                            [this](const Frame& f) { return kv_server_->handle_pull(f); });
  server_->register_handler(kMsgPush,
                            [this](const Frame& f) { return kv_server_->handle_push(f); });
  server_->register_handler(kMsgRegister,
                            [this](const Frame& f) { return kv_server_->handle_register(f); });
  server_->register_handler(kMsgSample, make_sampling_handler(&part_));
  server_->register_handler(kMsgAllreduceSeg,
                            [this](const Frame& f) { return collective_->handle_segment(f); });
  server_->register_handler(kMsgControl, [](const Frame& f) {
    ByteReader r(f.body);
    std::string op = r.get_string();
    ByteWriter w;
    w.put_string(op == "ping" ? "pong" : "unknown");
    return w.take();
  });
  server_->start();
}

Worker::~Worker() {
  for (auto& p : peers_)
    if (p) p->close();
  if (server_) server_->stop();
}

void Worker::connect_peers() {
  peers_.assign(cfg_.num_machines(), nullptr);
  for (PartId m = 0; m < cfg_.num_machines(); ++m) {
    if (m == cfg_.rank) continue;
    peers_[m] = std::make_shared<RpcClient>(cfg_.endpoints[m].host, cfg_.endpoints[m].port);
    ByteWriter w;
    w.put_string("ping");
    peers_[m]->call(kMsgControl, w.take());
  }
  kv_client_ = std::make_unique<KVStoreClient>(cfg_.rank, &book_, kv_server_.get(), peers_);
  std::vector<std::shared_ptr<SamplingBackend>> backends(cfg_.num_machines());
  for (PartId m = 0; m < cfg_.num_machines(); ++m) {
    if (m == cfg_.rank)
      backends[m] = std::make_shared<LocalSamplingBackend>(&part_);
    else
      backends[m] = std::make_shared<RpcSamplingBackend>(peers_[m]);
  }
  sampler_ = std::make_unique<NeighborSampler>(&book_, std::move(backends), cfg_.rank);
}

void Worker::setup_tensors() {
  // Every worker registers identical specs for its own shard (setup phase is
  // single-threaded); the REGISTER RPC serves external clients.
  TensorSpec label;
  label.name = "label";
  label.policy = PolicyKind::kNode;
  label.dim = 1;
  label.seed = cfg_.seed;
  kv_server_->register_tensor(label);
  {
    DenseMatrix labels(dataset_.num_nodes, 1);
    for (std::uint64_t v = 0; v < dataset_.num_nodes; ++v)
      labels.at(v, 0) = static_cast<float>(dataset_.labels[v]);
    kv_server_->load_rows("label", labels, part_.node_orig_ids);
  }

  if (cfg_.embed_mode) {
    feat_tensor_ = "emb";
    TensorSpec emb;
    emb.name = "emb";
    emb.policy = PolicyKind::kNode;
    emb.dim = cfg_.embed_dim;
    emb.init = InitKind::kUniform;
    emb.init_lo = -0.05f;
    emb.init_hi = 0.05f;
    emb.trainable = true;
    emb.optimizer = {SparseOptKind::kAdagrad, cfg_.sparse_lr, 1e-10f};
    emb.seed = cfg_.seed;
    kv_server_->register_tensor(emb);
  } else {
    feat_tensor_ = "feat";
    TensorSpec feat;
    feat.name = "feat";
    feat.policy = PolicyKind::kNode;
    feat.dim = static_cast<std::uint32_t>(dataset_.features.cols);
    feat.seed = cfg_.seed;
    kv_server_->register_tensor(feat);
    kv_server_->load_rows("feat", dataset_.features, part_.node_orig_ids);
  }
}

WorkerResult Worker::run() {
  connect_peers();
  setup_tensors();

  WorkerResult result;
  std::vector<std::thread> trainers;
  std::vector<std::string> errors(cfg_.trainers_per_machine);
  for (std::uint32_t t = 0; t < cfg_.trainers_per_machine; ++t) {
    trainers.emplace_back([this, t, &result, &errors] {
      try {
        trainer_main(t, &result);
      } catch (const std::exception& e) {
        errors[t] = e.what();
        failed_ = true;
      }
    });
  }
  for (auto& t : trainers) t.join();
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("trainer failed: " + e);
  return result;
}

void Worker::trainer_main(std::uint32_t local_trainer, WorkerResult* result) {
  TrainerContext ctx;
  ctx.local_trainer = local_trainer;
  ctx.global_rank = cfg_.rank * cfg_.trainers_per_machine + local_trainer;
  ctx.shard = split_.shards[ctx.global_rank];
  ctx.opt = DenseSgd(cfg_.lr, cfg_.momentum);

  const std::size_t num_layers = cfg_.fanouts.num_layers();
  std::vector<std::uint64_t> dims;
  dims.push_back(cfg_.embed_mode ? cfg_.embed_dim : dataset_.features.cols);
  for (std::size_t l = 0; l + 1 < num_layers; ++l) dims.push_back(cfg_.hidden);
  dims.push_back(dataset_.num_classes);
  ctx.params = SageParams::glorot(dims, cfg_.seed);

  collective_->barrier(ctx.global_rank);

  const bool is_root = ctx.global_rank == 0;
  for (std::uint32_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    EpochStats stats = run_epoch(ctx, epoch);

    double val_acc = -1.0, test_acc = -1.0;
    const bool eval_now =
        cfg_.eval_every > 0 && ((epoch + 1) % cfg_.eval_every == 0 || epoch + 1 == cfg_.epochs);
    if (is_root && eval_now) {
      val_acc = evaluate(ctx, 1);
      test_acc = evaluate(ctx, 2);
    }

    // Global aggregation; accuracy slots are scaled so the mean recovers the
    // root's value, and a flag slot distinguishes "not evaluated".
    const float w = static_cast<float>(cfg_.world_size());
    std::vector<float> v{
        static_cast<float>(stats.sample_s),
        static_cast<float>(stats.data_copy_s),
        static_cast<float>(stats.forward_backward_s),
        static_cast<float>(stats.sync_s),
        static_cast<float>(stats.epoch_s),
        static_cast<float>(stats.loss),
        static_cast<float>(ctx.epoch_local_inputs),
        static_cast<float>(ctx.epoch_total_inputs),
        is_root && val_acc >= 0 ? static_cast<float>(val_acc) * w : 0.0f,
        is_root && test_acc >= 0 ? static_cast<float>(test_acc) * w : 0.0f,
        is_root && eval_now ? w : 0.0f,
    };
    std::vector<float> mean = collective_->allreduce_mean(ctx.global_rank, v);

    EpochStats agg;
    agg.sample_s = mean[0];
    agg.data_copy_s = mean[1];
    agg.forward_backward_s = mean[2];
    agg.sync_s = mean[3];
    agg.epoch_s = mean[4];
    agg.loss = mean[5];
    agg.locality_fraction = mean[7] > 0 ? mean[6] / mean[7] : 0.0;
    agg.iterations = stats.iterations;
    if (mean[10] > 0.5f) {
      agg.val_acc = mean[8];
      agg.test_acc = mean[9];
    }

    if (local_trainer == 0) {
      result->epochs.push_back(agg);
      if (agg.val_acc >= 0) {
        result->final_val_acc = agg.val_acc;
        result->final_test_acc = agg.test_acc;
      }
      if (is_root && !cfg_.metrics_out.empty())
        append_metrics_record(cfg_.metrics_out, epoch, agg);
    }
  }

  collective_->barrier(ctx.global_rank);
}

EpochStats Worker::run_epoch(TrainerContext& ctx, std::uint32_t epoch) {
  EpochStats stats;
  const auto t_epoch = Clock::now();

  std::vector<NodeId> order = ctx.shard;
  {
    Rng rng(mix_seed(cfg_.seed, epoch, ctx.global_rank));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
  }
  const std::uint64_t my_batches =
      (order.size() + cfg_.batch_size - 1) / cfg_.batch_size;
  const std::uint64_t iterations =
      *std::max_element(shard_batches_.begin(), shard_batches_.end());
  const std::uint64_t rng_seed = mix_seed(cfg_.seed, 0xba7c, epoch);

  auto make_batch = [&](std::size_t b) {
    const std::size_t begin = b * cfg_.batch_size;
    const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
    std::span<const NodeId> seeds(order.data() + begin, end - begin);
    return sampler_->sample_minibatch(seeds, cfg_.fanouts, rng_seed);
  };
  BatchPrefetcher prefetch(make_batch, my_batches, cfg_.prefetch_depth);

  const std::uint64_t num_params = ctx.params.num_params();
  std::vector<float> flat(num_params);
  double loss_sum = 0.0;
  std::uint64_t local_inputs = 0, total_inputs = 0;
  const NodeId my_begin = book_.node_range_starts[cfg_.rank];
  const NodeId my_end = book_.node_range_starts[cfg_.rank + 1];

  for (std::uint64_t it = 0; it < iterations; ++it) {
    const bool active = it < my_batches;
    SageParams grads;
    DenseMatrix dinput;
    MiniBatchGraph batch;
    if (active) {
      auto t0 = Clock::now();
      batch = prefetch.pop();
      stats.sample_s += seconds_since(t0);

      t0 = Clock::now();
      DenseMatrix feats = kv_client_->pull(feat_tensor_, batch.input_nodes);
      DenseMatrix label_rows = kv_client_->pull("label", batch.seeds);
      stats.data_copy_s += seconds_since(t0);

      for (NodeId g : batch.input_nodes) {
        if (g >= my_begin && g < my_end) ++local_inputs;
        ++total_inputs;
      }

      t0 = Clock::now();
      std::vector<std::int32_t> labels(batch.seeds.size());
      for (std::size_t i = 0; i < labels.size(); ++i)
        labels[i] = static_cast<std::int32_t>(label_rows.at(i, 0));
      auto [logits, tape] = sage_forward(ctx.params, batch, feats);
      LossGrad lg = cross_entropy(logits, labels);
      auto grad_pair = sage_backward(ctx.params, batch, tape, lg.dlogits);
      grads = std::move(grad_pair.first);
      dinput = std::move(grad_pair.second);
      loss_sum += lg.loss;
      grads.to_flat(flat);
      stats.forward_backward_s += seconds_since(t0);
    } else {
      std::fill(flat.begin(), flat.end(), 0.0f);
      grads = SageParams::zeros_like(ctx.params);
    }

    auto t0 = Clock::now();
    std::vector<float> mean = collective_->allreduce_mean(ctx.global_rank, flat);
    grads.from_flat(mean);
    ctx.opt.step(ctx.params, grads);
    stats.sync_s += seconds_since(t0);

    if (cfg_.embed_mode && active) {
      auto handles = kv_client_->push_async(feat_tensor_, batch.input_nodes, dinput);
      for (auto& h : handles) ctx.push_queue.push_back(std::move(h));
      while (ctx.push_queue.size() > cfg_.push_inflight) {
        ctx.push_queue.front().await_ok();
        ctx.push_queue.pop_front();
      }
    }

    if (cfg_.debug_checksums) {
      auto sums = collective_->allgather_u64(ctx.global_rank, params_checksum(ctx.params));
      for (std::uint64_t s : sums)
        if (s != sums[0])
          throw std::runtime_error("replica divergence detected at iteration " +
                                   std::to_string(it));
    }
    stats.iterations = it + 1;
  }

  // Quiesce point: asynchronous sparse pushes drain at the epoch boundary.
  auto t0 = Clock::now();
  while (!ctx.push_queue.empty()) {
    ctx.push_queue.front().await_ok();
    ctx.push_queue.pop_front();
  }
  stats.sync_s += seconds_since(t0);

  stats.epoch_s = seconds_since(t_epoch);
  stats.loss = my_batches > 0 ? loss_sum / static_cast<double>(my_batches) : 0.0;
  stats.locality_fraction =
      total_inputs > 0 ? static_cast<double>(local_inputs) / static_cast<double>(total_inputs)
                       : 0.0;
  stats.iterations = iterations;
  ctx.epoch_local_inputs = local_inputs;
  ctx.epoch_total_inputs = total_inputs;
  return stats;
}

double Worker::evaluate(TrainerContext& ctx, std::uint8_t which_split) {
  const std::vector<NodeId>& ids = which_split == 1 ? val_ids_ : test_ids_;
  if (ids.empty()) return -1.0;
  Fanouts full;
  full.per_layer.assign(cfg_.fanouts.num_layers(), kFullNeighborhood);

  std::uint64_t correct = 0;
  for (std::size_t begin = 0; begin < ids.size(); begin += cfg_.eval_batch) {
    const std::size_t end = std::min(ids.size(), begin + cfg_.eval_batch);
    std::span<const NodeId> seeds(ids.data() + begin, end - begin);
    MiniBatchGraph batch = sampler_->sample_minibatch(seeds, full, 0);
    DenseMatrix feats = kv_client_->pull(feat_tensor_, batch.input_nodes);
    DenseMatrix label_rows = kv_client_->pull("label", batch.seeds);
    auto [logits, tape] = sage_forward(ctx.params, batch, feats);
    for (std::uint64_t i = 0; i < logits.rows; ++i) {
      const float* row = logits.row(i);
      std::uint64_t best = 0;
      for (std::uint64_t j = 1; j < logits.cols; ++j)
        if (row[j] > row[best]) best = j;
      if (static_cast<std::int32_t>(best) == static_cast<std::int32_t>(label_rows.at(i, 0)))
        ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace minisage
