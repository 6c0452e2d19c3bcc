/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/synthetic.hpp
 * @brief Synthetic benchmark datasets: planted-partition (SBM) and
 *        preferential-attachment graphs with features, labels, and splits.
 */
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "minisage/dense_matrix.hpp"
#include "minisage/graph.hpp"

namespace minisage {

struct SyntheticDataset {
  // Directed edge list; undirected graphs carry both directions explicitly.
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::uint64_t num_nodes = 0;
  std::uint32_t num_classes = 0;
  DenseMatrix features;             // [n x d]
  std::vector<std::int32_t> labels; // class per node
  std::vector<std::uint8_t> split;  // 0 train, 1 val, 2 test
  std::uint64_t seed = 0;
  std::string kind;

  Graph build_graph() const { return build_csr(edges, num_nodes); }
};

struct SbmParams {
  std::uint64_t num_nodes = 1000;
  std::uint32_t communities = 4;
  double p_in = 0.1;
  double p_out = 0.01;
  std::uint32_t feat_dim = 0;   // 0 means one-hot width = communities
  float feat_noise = 1.0f;      // gaussian noise added to the one-hot features
};

/// Planted partition: contiguous community blocks, label = community,
/// features = one-hot community + noise, 60/20/20 split stratified per class.
SyntheticDataset gen_sbm(const SbmParams& params, std::uint64_t seed);

struct PowerlawParams {
  std::uint64_t num_nodes = 1000;
  std::uint32_t attach = 4;     // edges added per incoming node
  std::uint32_t num_classes = 4;
  float feat_noise = 1.0f;
};

/// Preferential attachment; labels assigned uniformly, features one-hot+noise.
SyntheticDataset gen_powerlaw(const PowerlawParams& params, std::uint64_t seed);

/// Writes edges.txt, features.bin, labels.bin, masks.bin, balance_labels.bin
/// ([1, is_train] per node), and meta.txt into dir.
void save_dataset(const std::string& dir, const SyntheticDataset& ds);
SyntheticDataset load_dataset(const std::string& dir);

}  // namespace minisage
