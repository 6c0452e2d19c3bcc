/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/gnn.hpp
 * @brief GraphSAGE (mean aggregator) forward and manual backward over
 *        mini-batch blocks, cross-entropy loss, and SGD update kernels.
 *
 * Per layer: z = h_dst * W_self + mean_{u in sampled N(v)} h_u * W_neigh + b,
 * ReLU on every layer except the last. Targets with no sampled in-edges
 * aggregate a zero vector. All math is float32 with fixed loop order, so a
 * fixed (params, batch) pair reproduces logits bitwise.
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "minisage/dense_matrix.hpp"
#include "minisage/sampler.hpp"

namespace minisage {

struct SageLayerParams {
  DenseMatrix w_self;        // [d_in x d_out]
  DenseMatrix w_neigh;       // [d_in x d_out]
  std::vector<float> bias;   // [d_out]
};

struct SageParams {
  std::vector<SageLayerParams> layers;

  /// Glorot-uniform weights, zero bias. dims has num_layers + 1 entries.
  static SageParams glorot(std::span<const std::uint64_t> dims, std::uint64_t seed);

  /// Zero-filled gradients shaped like `like`.
  static SageParams zeros_like(const SageParams& like);

  std::uint64_t num_params() const;
  void to_flat(std::span<float> out) const;
  void from_flat(std::span<const float> in);
};

/// Cached activations for the backward pass.
struct SageTape {
  std::vector<DenseMatrix> inputs;         // per layer: h over src_nodes
  std::vector<DenseMatrix> means;          // per layer: aggregated neighbor mean
  std::vector<DenseMatrix> pre;            // per layer: pre-activation z
  std::vector<std::vector<float>> inv_degree;  // per layer: 1/#sampled-in-edges per dst
};

/// Forward pass. input_feats rows align with batch.input_nodes; logits rows
/// align with batch.seeds.
std::pair<DenseMatrix, SageTape> sage_forward(const SageParams& params,
                                              const MiniBatchGraph& batch,
                                              const DenseMatrix& input_feats);

struct LossGrad {
  float loss = 0.0f;
  DenseMatrix dlogits;
};

/// Mean over rows of -log softmax(logits)[label]; dlogits = (softmax - onehot) / N.
LossGrad cross_entropy(const DenseMatrix& logits, std::span<const std::int32_t> labels);

/// Exact reverse-mode gradients of sage_forward. Returns parameter gradients
/// and the gradient w.r.t. input_feats (the sparse-embedding gradient).
std::pair<SageParams, DenseMatrix> sage_backward(const SageParams& params,
                                                 const MiniBatchGraph& batch,
                                                 const SageTape& tape,
                                                 const DenseMatrix& dlogits);

/// p -= lr * g, elementwise.
void sgd_step(SageParams& params, const SageParams& grads, float lr);

/// Dense optimizer with optional momentum (momentum 0 is plain SGD).
class DenseSgd {
 public:
  DenseSgd(float lr, float momentum) : lr_(lr), momentum_(momentum) {}
  void step(SageParams& params, const SageParams& grads);

 private:
  float lr_;
  float momentum_;
  std::vector<float> velocity_;
};

// Row-major float32 matmul kernels (fixed i-k-j order).
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);  // a^T * b
DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b);  // a * b^T

}  // namespace minisage
