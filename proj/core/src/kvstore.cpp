/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/kvstore.cpp
 */
#include "minisage/kvstore.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "minisage/rng.hpp"

namespace minisage {

namespace {

constexpr std::size_t kLockStripes = 256;

// Stable name hash (std::hash is not pinned across implementations).
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void TensorSpec::encode(ByteWriter& w) const {
  w.put_string(name);
  w.put_u8(static_cast<std::uint8_t>(policy));
  w.put_u32(dim);
  w.put_u8(static_cast<std::uint8_t>(init));
  w.put_f32(init_lo);
  w.put_f32(init_hi);
  w.put_u8(trainable ? 1 : 0);
  w.put_u8(static_cast<std::uint8_t>(optimizer.kind));
  w.put_f32(optimizer.learning_rate);
  w.put_f32(optimizer.adagrad_eps);
  w.put_u64(seed);
}

TensorSpec TensorSpec::decode(ByteReader& r) {
  TensorSpec s;
  s.name = r.get_string();
  s.policy = static_cast<PolicyKind>(r.get_u8());
  s.dim = r.get_u32();
  s.init = static_cast<InitKind>(r.get_u8());
  s.init_lo = r.get_f32();
  s.init_hi = r.get_f32();
  s.trainable = r.get_u8() != 0;
  s.optimizer.kind = static_cast<SparseOptKind>(r.get_u8());
  s.optimizer.learning_rate = r.get_f32();
  s.optimizer.adagrad_eps = r.get_f32();
  s.seed = r.get_u64();
  return s;
}

KVServer::KVServer(PartId part, const PartitionBook* book)
    : part_(part), book_(book), stripes_(kLockStripes) {}

void KVServer::register_tensor(const TensorSpec& spec) {
  if (spec.dim == 0) throw std::invalid_argument("tensor dim must be > 0");
  if (tensors_.count(spec.name)) throw std::invalid_argument("tensor already registered: " + spec.name);
  if (spec.trainable && spec.optimizer.learning_rate <= 0.0f)
    throw std::invalid_argument("trainable tensor needs a positive learning rate");

  PartitionPolicy policy{spec.policy, book_};
  auto shard = std::make_unique<TensorShard>();
  shard->spec = spec;
  shard->row_start = policy.range_start(part_);
  shard->rows = DenseMatrix(policy.part_rows(part_), spec.dim);
  if (spec.init == InitKind::kUniform) {
    Rng rng(mix_seed(spec.seed, part_, fnv1a(spec.name)));
    for (float& x : shard->rows.data) x = rng.next_float(spec.init_lo, spec.init_hi);
  }
  if (spec.trainable) shard->optimizer_state = DenseMatrix(shard->rows.rows, spec.dim);
  tensors_.emplace(spec.name, std::move(shard));
}

bool KVServer::has_tensor(const std::string& name) const { return tensors_.count(name) > 0; }

const TensorSpec& KVServer::spec(const std::string& name) const { return shard(name).spec; }

TensorShard& KVServer::shard(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::invalid_argument("unknown tensor: " + name);
  return *it->second;
}

const TensorShard& KVServer::shard(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::invalid_argument("unknown tensor: " + name);
  return *it->second;
}

std::mutex& KVServer::row_lock(std::uint64_t row) const {
  return stripes_[row % kLockStripes];
}

void KVServer::read_rows(const std::string& name, std::span<const std::uint64_t> ids,
                         float* dst) const {
  const TensorShard& t = shard(name);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::uint64_t row = ids[i] - t.row_start;
    if (ids[i] < t.row_start || row >= t.rows.rows)
      throw std::invalid_argument("id not owned by this server");
    std::lock_guard lock(row_lock(row));
    std::memcpy(dst + i * t.spec.dim, t.rows.row(row), t.spec.dim * sizeof(float));
  }
}

void KVServer::apply_push(const std::string& name, std::span<const std::uint64_t> ids,
                          const float* grads, std::uint64_t dim) {
  TensorShard& t = shard(name);
  if (!t.spec.trainable) throw std::invalid_argument("push to non-trainable tensor: " + name);
  if (dim != t.spec.dim) throw std::invalid_argument("push gradient dim mismatch");
  const float lr = t.spec.optimizer.learning_rate;
  const float eps = t.spec.optimizer.adagrad_eps;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::uint64_t row = ids[i] - t.row_start;
    if (ids[i] < t.row_start || row >= t.rows.rows)
      throw std::invalid_argument("id not owned by this server");
    const float* g = grads + i * dim;
    std::lock_guard lock(row_lock(row));
    float* r = t.rows.row(row);
    if (t.spec.optimizer.kind == SparseOptKind::kSgd) {
      for (std::uint64_t d = 0; d < dim; ++d) r[d] -= lr * g[d];
    } else {
      float* state = t.optimizer_state.row(row);
      for (std::uint64_t d = 0; d < dim; ++d) {
        state[d] += g[d] * g[d];
        r[d] -= lr * g[d] / (std::sqrt(state[d]) + eps);
      }
    }
  }
}

void KVServer::load_rows(const std::string& name, const DenseMatrix& source,
                         std::span<const NodeId> source_row_of) {
  TensorShard& t = shard(name);
  if (source.cols != t.spec.dim) throw std::invalid_argument("load_rows dim mismatch");
  if (source_row_of.size() < t.rows.rows) throw std::invalid_argument("load_rows map too short");
  for (std::uint64_t i = 0; i < t.rows.rows; ++i)
    std::memcpy(t.rows.row(i), source.row(source_row_of[i]), t.spec.dim * sizeof(float));
}

std::span<const float> KVServer::row_view(const std::string& name,
                                          std::uint64_t local_row) const {
  const TensorShard& t = shard(name);
  if (local_row >= t.rows.rows) throw std::invalid_argument("row out of range");
  return t.rows.row_span(local_row);
}

std::vector<std::uint8_t> KVServer::handle_pull(const Frame& req) const {
  ByteReader r(req.body);
  std::string name = r.get_string();
  auto ids = r.get_array<std::uint64_t>();
  const TensorShard& t = shard(name);
  ByteWriter w;
  w.put_u32(t.spec.dim);
  w.put_u64(ids.size());
  std::vector<float> rows(ids.size() * t.spec.dim);
  read_rows(name, ids, rows.data());
  w.put_raw(rows.data(), rows.size() * sizeof(float));
  return w.take();
}

std::vector<std::uint8_t> KVServer::handle_push(const Frame& req) {
  ByteReader r(req.body);
  std::string name = r.get_string();
  auto ids = r.get_array<std::uint64_t>();
  std::uint32_t dim = r.get_u32();
  std::vector<float> grads(ids.size() * dim);
  r.get_raw(grads.data(), grads.size() * sizeof(float));
  apply_push(name, ids, grads.data(), dim);
  return {};
}

std::vector<std::uint8_t> KVServer::handle_register(const Frame& req) {
  ByteReader r(req.body);
  TensorSpec spec = TensorSpec::decode(r);
  register_tensor(spec);
  return {};
}

// ---------------------------------------------------------------------------
// KVStoreClient

KVStoreClient::KVStoreClient(PartId my_part, const PartitionBook* book, KVServer* local_server,
                             std::vector<std::shared_ptr<RpcClient>> peers)
    : my_part_(my_part), book_(book), local_(local_server), peers_(std::move(peers)) {}

std::uint32_t KVStoreClient::dim_of(const std::string& name) const {
  return local_->spec(name).dim;
}

void KVStoreClient::register_everywhere(const TensorSpec& spec) {
  ByteWriter w;
  spec.encode(w);
  std::vector<PendingReply> acks;
  for (PartId p = 0; p < book_->num_parts; ++p) {
    if (p == my_part_) continue;
    acks.push_back(peers_[p]->call_async(kMsgRegister, w.bytes()));
  }
  local_->register_tensor(spec);
  for (auto& a : acks) a.await_ok();
}

// Per-server request grouping: positions into the caller's id list plus the
// ids themselves, so replies scatter back into the right rows.
struct KVStoreClient::Groups {
  std::vector<std::vector<std::uint64_t>> ids;
  std::vector<std::vector<std::size_t>> positions;
};

DenseMatrix KVStoreClient::pull(const std::string& name,
                                std::span<const std::uint64_t> ids) const {
  const TensorSpec& spec = local_->spec(name);
  PartitionPolicy policy{spec.policy, book_};
  DenseMatrix out(ids.size(), spec.dim);

  Groups groups;
  groups.ids.resize(book_->num_parts);
  groups.positions.resize(book_->num_parts);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    PartId p = policy.owner(ids[i]);
    groups.ids[p].push_back(ids[i]);
    groups.positions[p].push_back(i);
  }

  // Remote requests go out first; the local gather overlaps their flight.
  std::vector<std::pair<PartId, PendingReply>> pending;
  for (PartId p = 0; p < book_->num_parts; ++p) {
    if (p == my_part_ || groups.ids[p].empty()) continue;
    ByteWriter w;
    w.put_string(name);
    w.put_array<std::uint64_t>(groups.ids[p]);
    pending.emplace_back(p, peers_[p]->call_async(kMsgPull, w.take()));
  }

  if (!groups.ids[my_part_].empty()) {
    std::vector<float> rows(groups.ids[my_part_].size() * spec.dim);
    local_->read_rows(name, groups.ids[my_part_], rows.data());
    const auto& pos = groups.positions[my_part_];
    for (std::size_t i = 0; i < pos.size(); ++i)
      std::memcpy(out.row(pos[i]), rows.data() + i * spec.dim, spec.dim * sizeof(float));
  }

  for (auto& [p, handle] : pending) {
    Frame reply = handle.await_ok();
    ByteReader r(reply.body);
    std::uint32_t dim = r.get_u32();
    std::uint64_t n = r.get_u64();
    if (dim != spec.dim || n != groups.ids[p].size())
      throw TransportError("pull reply shape mismatch");
    const auto& pos = groups.positions[p];
    for (std::size_t i = 0; i < n; ++i) r.get_raw(out.row(pos[i]), dim * sizeof(float));
  }
  return out;
}

std::vector<PendingReply> KVStoreClient::push_async(const std::string& name,
                                                    std::span<const std::uint64_t> ids,
                                                    const DenseMatrix& grads) const {
  const TensorSpec& spec = local_->spec(name);
  if (grads.rows != ids.size() || grads.cols != spec.dim)
    throw std::invalid_argument("push gradient shape mismatch");
  PartitionPolicy policy{spec.policy, book_};

  // Pre-aggregate duplicate ids (sum, first-appearance order) before any
  // split, so the applied update is independent of the server layout.
  std::vector<std::uint64_t> unique_ids;
  DenseMatrix agg;
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(ids.size());
  bool has_dup = false;
  for (std::uint64_t id : ids)
    if (!index.emplace(id, index.size()).second) has_dup = true;
  if (!has_dup) {
    unique_ids.assign(ids.begin(), ids.end());
  } else {
    unique_ids.resize(index.size());
    agg = DenseMatrix(index.size(), spec.dim);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t u = index[ids[i]];
      unique_ids[u] = ids[i];
      const float* g = grads.row(i);
      float* dst = agg.row(u);
      for (std::uint32_t d = 0; d < spec.dim; ++d) dst[d] += g[d];
    }
  }
  const DenseMatrix& use = has_dup ? agg : grads;

  Groups groups;
  groups.ids.resize(book_->num_parts);
  groups.positions.resize(book_->num_parts);
  for (std::size_t i = 0; i < unique_ids.size(); ++i) {
    PartId p = policy.owner(unique_ids[i]);
    groups.ids[p].push_back(unique_ids[i]);
    groups.positions[p].push_back(i);
  }

  std::vector<PendingReply> pending;
  for (PartId p = 0; p < book_->num_parts; ++p) {
    if (p == my_part_ || groups.ids[p].empty()) continue;
    ByteWriter w;
    w.put_string(name);
    w.put_array<std::uint64_t>(groups.ids[p]);
    w.put_u32(spec.dim);
    std::vector<float> rows(groups.ids[p].size() * spec.dim);
    for (std::size_t i = 0; i < groups.positions[p].size(); ++i)
      std::memcpy(rows.data() + i * spec.dim, use.row(groups.positions[p][i]),
                  spec.dim * sizeof(float));
    w.put_raw(rows.data(), rows.size() * sizeof(float));
    pending.push_back(peers_[p]->call_async(kMsgPush, w.take()));
  }

  if (!groups.ids[my_part_].empty()) {
    std::vector<float> rows(groups.ids[my_part_].size() * spec.dim);
    for (std::size_t i = 0; i < groups.positions[my_part_].size(); ++i)
      std::memcpy(rows.data() + i * spec.dim, use.row(groups.positions[my_part_][i]),
                  spec.dim * sizeof(float));
    local_->apply_push(name, groups.ids[my_part_], rows.data(), spec.dim);
  }
  return pending;
}

void KVStoreClient::push(const std::string& name, std::span<const std::uint64_t> ids,
                         const DenseMatrix& grads) const {
  for (auto& h : push_async(name, ids, grads)) h.await_ok();
}

DenseMatrix KVStoreClient::local_fast_path(const std::string& name,
                                           std::span<const std::uint64_t> ids) const {
  const TensorSpec& spec = local_->spec(name);
  PartitionPolicy policy{spec.policy, book_};
  for (std::uint64_t id : ids)
    if (policy.owner(id) != my_part_)
      throw ContractViolation("local_fast_path: id " + std::to_string(id) +
                              " is not owned by the co-located server");
  DenseMatrix out(ids.size(), spec.dim);
  if (!ids.empty()) local_->read_rows(name, ids, out.data.data());
  return out;
}

}  // namespace minisage
