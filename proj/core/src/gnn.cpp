/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/gnn.cpp
 */
#include "minisage/gnn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "minisage/rng.hpp"

namespace minisage {

namespace {

void check(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check(a.cols == b.rows, "matmul shape mismatch");
  DenseMatrix c(a.rows, b.cols);
  for (std::uint64_t i = 0; i < a.rows; ++i) {
    const float* ai = a.row(i);
    float* ci = c.row(i);
    for (std::uint64_t k = 0; k < a.cols; ++k) {
      const float aik = ai[k];
      if (aik == 0.0f) continue;
      const float* bk = b.row(k);
      for (std::uint64_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  check(a.rows == b.rows, "matmul_at_b shape mismatch");
  DenseMatrix c(a.cols, b.cols);
  for (std::uint64_t k = 0; k < a.rows; ++k) {
    const float* ak = a.row(k);
    const float* bk = b.row(k);
    for (std::uint64_t i = 0; i < a.cols; ++i) {
      const float aki = ak[i];
      if (aki == 0.0f) continue;
      float* ci = c.row(i);
      for (std::uint64_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  check(a.cols == b.cols, "matmul_a_bt shape mismatch");
  DenseMatrix c(a.rows, b.rows);
  for (std::uint64_t i = 0; i < a.rows; ++i) {
    const float* ai = a.row(i);
    float* ci = c.row(i);
    for (std::uint64_t j = 0; j < b.rows; ++j) {
      const float* bj = b.row(j);
      float acc = 0.0f;
      for (std::uint64_t k = 0; k < a.cols; ++k) acc += ai[k] * bj[k];
      ci[j] = acc;
    }
  }
  return c;
}

SageParams SageParams::glorot(std::span<const std::uint64_t> dims, std::uint64_t seed) {
  check(dims.size() >= 2, "need at least one layer");
  SageParams p;
  p.layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto d_in = dims[l], d_out = dims[l + 1];
    float bound = std::sqrt(6.0f / static_cast<float>(d_in + d_out));
    SageLayerParams& layer = p.layers[l];
    layer.w_self = DenseMatrix(d_in, d_out);
    layer.w_neigh = DenseMatrix(d_in, d_out);
    layer.bias.assign(d_out, 0.0f);
    Rng rng_self(mix_seed(seed, 2 * l));
    for (float& x : layer.w_self.data) x = rng_self.next_float(-bound, bound);
    Rng rng_neigh(mix_seed(seed, 2 * l + 1));
    for (float& x : layer.w_neigh.data) x = rng_neigh.next_float(-bound, bound);
  }
  return p;
}

SageParams SageParams::zeros_like(const SageParams& like) {
  SageParams p;
  p.layers.resize(like.layers.size());
  for (std::size_t l = 0; l < like.layers.size(); ++l) {
    p.layers[l].w_self = DenseMatrix(like.layers[l].w_self.rows, like.layers[l].w_self.cols);
    p.layers[l].w_neigh = DenseMatrix(like.layers[l].w_neigh.rows, like.layers[l].w_neigh.cols);
    p.layers[l].bias.assign(like.layers[l].bias.size(), 0.0f);
  }
  return p;
}

std::uint64_t SageParams::num_params() const {
  std::uint64_t n = 0;
  for (const auto& l : layers) n += l.w_self.data.size() + l.w_neigh.data.size() + l.bias.size();
  return n;
}

void SageParams::to_flat(std::span<float> out) const {
  check(out.size() == num_params(), "flat buffer size mismatch");
  std::size_t pos = 0;
  auto copy = [&](const float* src, std::size_t n) {
    std::memcpy(out.data() + pos, src, n * sizeof(float));
    pos += n;
  };
  for (const auto& l : layers) {
    copy(l.w_self.data.data(), l.w_self.data.size());
    copy(l.w_neigh.data.data(), l.w_neigh.data.size());
    copy(l.bias.data(), l.bias.size());
  }
}

void SageParams::from_flat(std::span<const float> in) {
  check(in.size() == num_params(), "flat buffer size mismatch");
  std::size_t pos = 0;
  auto copy = [&](float* dst, std::size_t n) {
    std::memcpy(dst, in.data() + pos, n * sizeof(float));
    pos += n;
  };
  for (auto& l : layers) {
    copy(l.w_self.data.data(), l.w_self.data.size());
    copy(l.w_neigh.data.data(), l.w_neigh.data.size());
    copy(l.bias.data(), l.bias.size());
  }
}

std::pair<DenseMatrix, SageTape> sage_forward(const SageParams& params,
                                              const MiniBatchGraph& batch,
                                              const DenseMatrix& input_feats) {
  const std::size_t L = params.layers.size();
  check(batch.blocks.size() == L, "layer count mismatch between params and batch");
  check(input_feats.rows == batch.input_nodes.size(), "input feature rows mismatch");

  SageTape tape;
  tape.inputs.resize(L);
  tape.means.resize(L);
  tape.pre.resize(L);
  tape.inv_degree.resize(L);

  DenseMatrix h = input_feats;
  DenseMatrix logits;
  for (std::size_t l = 0; l < L; ++l) {
    const Block& block = batch.blocks[l];
    const SageLayerParams& layer = params.layers[l];
    check(h.cols == layer.w_self.rows, "feature dim mismatch");
    check(h.rows == block.src_nodes.size(), "activation rows mismatch");
    const std::uint64_t num_dst = block.dst_nodes.size();
    const std::uint64_t dim = h.cols;

    // Neighbor mean; zero vector for targets with no sampled in-edges.
    DenseMatrix mean(num_dst, dim);
    std::vector<float> inv_deg(num_dst, 0.0f);
    {
      std::vector<std::uint32_t> count(num_dst, 0);
      for (auto [s, d] : block.edges) {
        const float* hs = h.row(s);
        float* md = mean.row(d);
        for (std::uint64_t j = 0; j < dim; ++j) md[j] += hs[j];
        ++count[d];
      }
      for (std::uint64_t d = 0; d < num_dst; ++d) {
        if (count[d] == 0) continue;
        inv_deg[d] = 1.0f / static_cast<float>(count[d]);
        float* md = mean.row(d);
        for (std::uint64_t j = 0; j < dim; ++j) md[j] *= inv_deg[d];
      }
    }

    // z = h_dst * W_self + mean * W_neigh + b. dst rows are the src prefix.
    DenseMatrix h_dst(num_dst, dim);
    std::memcpy(h_dst.data.data(), h.data.data(), num_dst * dim * sizeof(float));
    DenseMatrix z = matmul(h_dst, layer.w_self);
    DenseMatrix zn = matmul(mean, layer.w_neigh);
    for (std::uint64_t i = 0; i < z.rows; ++i) {
      float* zi = z.row(i);
      const float* ni = zn.row(i);
      for (std::uint64_t j = 0; j < z.cols; ++j) zi[j] += ni[j] + layer.bias[j];
    }

    tape.inputs[l] = std::move(h);
    tape.means[l] = std::move(mean);
    tape.pre[l] = z;
    tape.inv_degree[l] = std::move(inv_deg);

    if (l + 1 == L) {
      logits = std::move(z);
    } else {
      for (float& x : z.data) x = x > 0.0f ? x : 0.0f;
      h = std::move(z);
    }
  }
  return {std::move(logits), std::move(tape)};
}

LossGrad cross_entropy(const DenseMatrix& logits, std::span<const std::int32_t> labels) {
  check(labels.size() == logits.rows, "label count mismatch");
  const std::uint64_t n = logits.rows, c = logits.cols;
  LossGrad out;
  out.dlogits = DenseMatrix(n, c);
  double loss = 0.0;
  const float inv_n = 1.0f / static_cast<float>(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const float* z = logits.row(i);
    float* d = out.dlogits.row(i);
    check(labels[i] >= 0 && static_cast<std::uint64_t>(labels[i]) < c, "label out of range");
    float zmax = z[0];
    for (std::uint64_t j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
    float denom = 0.0f;
    for (std::uint64_t j = 0; j < c; ++j) denom += std::exp(z[j] - zmax);
    for (std::uint64_t j = 0; j < c; ++j) {
      float p = std::exp(z[j] - zmax) / denom;
      d[j] = p * inv_n;
    }
    d[labels[i]] -= inv_n;
    loss -= std::log(std::exp(z[labels[i]] - zmax) / denom);
  }
  out.loss = static_cast<float>(loss / static_cast<double>(n));
  return out;
}

std::pair<SageParams, DenseMatrix> sage_backward(const SageParams& params,
                                                 const MiniBatchGraph& batch,
                                                 const SageTape& tape,
                                                 const DenseMatrix& dlogits) {
  const std::size_t L = params.layers.size();
  check(tape.pre.size() == L && batch.blocks.size() == L, "tape/params mismatch");

  SageParams grads = SageParams::zeros_like(params);
  DenseMatrix dh = dlogits;  // gradient w.r.t. the current layer's output

  for (std::size_t l = L; l-- > 0;) {
    const Block& block = batch.blocks[l];
    const SageLayerParams& layer = params.layers[l];
    const DenseMatrix& h = tape.inputs[l];
    const std::uint64_t num_dst = block.dst_nodes.size();
    const std::uint64_t dim = h.cols;
    check(dh.rows == num_dst && dh.cols == layer.bias.size(), "upstream grad shape mismatch");

    // dz: through the ReLU on every layer but the last.
    DenseMatrix dz = std::move(dh);
    if (l + 1 != L) {
      const DenseMatrix& z = tape.pre[l];
      for (std::size_t i = 0; i < dz.data.size(); ++i)
        if (z.data[i] <= 0.0f) dz.data[i] = 0.0f;
    }

    DenseMatrix h_dst(num_dst, dim);
    std::memcpy(h_dst.data.data(), h.data.data(), num_dst * dim * sizeof(float));

    grads.layers[l].w_self = matmul_at_b(h_dst, dz);
    grads.layers[l].w_neigh = matmul_at_b(tape.means[l], dz);
    for (std::uint64_t i = 0; i < dz.rows; ++i) {
      const float* di = dz.row(i);
      for (std::uint64_t j = 0; j < dz.cols; ++j) grads.layers[l].bias[j] += di[j];
    }

    DenseMatrix dmean = matmul_a_bt(dz, layer.w_neigh);
    DenseMatrix dh_dst = matmul_a_bt(dz, layer.w_self);

    DenseMatrix dx(h.rows, dim);
    std::memcpy(dx.data.data(), dh_dst.data.data(), num_dst * dim * sizeof(float));
    for (std::size_t e = 0; e < block.edges.size(); ++e) {
      auto [s, d] = block.edges[e];
      const float scale = tape.inv_degree[l][d];
      const float* md = dmean.row(d);
      float* xs = dx.row(s);
      for (std::uint64_t j = 0; j < dim; ++j) xs[j] += scale * md[j];
    }
    dh = std::move(dx);
  }
  return {std::move(grads), std::move(dh)};
}

void sgd_step(SageParams& params, const SageParams& grads, float lr) {
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    for (std::size_t i = 0; i < p.w_self.data.size(); ++i) p.w_self.data[i] -= lr * g.w_self.data[i];
    for (std::size_t i = 0; i < p.w_neigh.data.size(); ++i)
      p.w_neigh.data[i] -= lr * g.w_neigh.data[i];
    for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= lr * g.bias[i];
  }
}

void DenseSgd::step(SageParams& params, const SageParams& grads) {
  if (momentum_ == 0.0f) {
    sgd_step(params, grads, lr_);
    return;
  }
  const std::uint64_t n = params.num_params();
  if (velocity_.empty()) velocity_.assign(n, 0.0f);
  std::vector<float> flat_g(n), flat_p(n);
  grads.to_flat(flat_g);
  params.to_flat(flat_p);
  for (std::uint64_t i = 0; i < n; ++i) {
    velocity_[i] = momentum_ * velocity_[i] + flat_g[i];
    flat_p[i] -= lr_ * velocity_[i];
  }
  params.from_flat(flat_p);
}

}  // namespace minisage
