/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/synthetic.cpp
 */
#include "minisage/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

#include "minisage/rng.hpp"

namespace minisage {

namespace {

// Box-Muller; std::normal_distribution output is implementation-defined.
float gaussian(Rng& rng) {
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  if (u1 < 1e-300) u1 = 1e-300;
  return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                            std::cos(2.0 * std::numbers::pi * u2));
}

void fill_features_and_split(SyntheticDataset& ds, std::uint32_t feat_dim, float noise,
                             std::uint64_t seed) {
  const std::uint64_t n = ds.num_nodes;
  const std::uint32_t c = ds.num_classes;
  const std::uint32_t d = feat_dim == 0 ? c : feat_dim;

  Rng rng(mix_seed(seed, 0xfea7));
  ds.features = DenseMatrix(n, d);
  for (std::uint64_t v = 0; v < n; ++v) {
    float* row = ds.features.row(v);
    for (std::uint32_t j = 0; j < d; ++j) row[j] = noise * gaussian(rng);
    row[ds.labels[v] % d] += 1.0f;
  }

  // 60/20/20, stratified per class.
  ds.split.assign(n, 0);
  Rng split_rng(mix_seed(seed, 0x5917));
  std::vector<std::vector<NodeId>> by_class(c);
  for (std::uint64_t v = 0; v < n; ++v) by_class[ds.labels[v]].push_back(v);
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i)
      std::swap(members[i - 1], members[split_rng.next_below(i)]);
    const std::size_t train_end = members.size() * 6 / 10;
    const std::size_t val_end = members.size() * 8 / 10;
    for (std::size_t i = 0; i < members.size(); ++i)
      ds.split[members[i]] = i < train_end ? 0 : (i < val_end ? 1 : 2);
  }
}

}  // namespace

SyntheticDataset gen_sbm(const SbmParams& params, std::uint64_t seed) {
  if (params.communities == 0 || params.num_nodes == 0)
    throw std::invalid_argument("bad SBM parameters");
  SyntheticDataset ds;
  ds.kind = "sbm";
  ds.seed = seed;
  ds.num_nodes = params.num_nodes;
  ds.num_classes = params.communities;

  const std::uint64_t block = params.num_nodes / params.communities;
  ds.labels.resize(params.num_nodes);
  for (std::uint64_t v = 0; v < params.num_nodes; ++v)
    ds.labels[v] = static_cast<std::int32_t>(
        std::min<std::uint64_t>(v / std::max<std::uint64_t>(block, 1), params.communities - 1));

  Rng rng(mix_seed(seed, 0x5b3a));
  for (NodeId i = 0; i < params.num_nodes; ++i) {
    for (NodeId j = i + 1; j < params.num_nodes; ++j) {
      double p = ds.labels[i] == ds.labels[j] ? params.p_in : params.p_out;
      if (rng.next_double() < p) {
        ds.edges.emplace_back(i, j);
        ds.edges.emplace_back(j, i);
      }
    }
  }
  fill_features_and_split(ds, params.feat_dim, params.feat_noise, seed);
  return ds;
}

SyntheticDataset gen_powerlaw(const PowerlawParams& params, std::uint64_t seed) {
  if (params.num_nodes < 2 || params.attach == 0 || params.num_classes == 0)
    throw std::invalid_argument("bad powerlaw parameters");
  SyntheticDataset ds;
  ds.kind = "powerlaw";
  ds.seed = seed;
  ds.num_nodes = params.num_nodes;
  ds.num_classes = params.num_classes;

  Rng rng(mix_seed(seed, 0xb4));
  // Preferential attachment via the repeated-endpoints trick.
  std::vector<NodeId> endpoints;
  std::vector<std::pair<NodeId, NodeId>> undirected;
  endpoints.push_back(0);
  for (NodeId v = 1; v < params.num_nodes; ++v) {
    std::uint32_t m = std::min<std::uint32_t>(params.attach, static_cast<std::uint32_t>(v));
    std::vector<NodeId> chosen;
    while (chosen.size() < m) {
      NodeId u = endpoints[rng.next_below(endpoints.size())];
      if (u != v && std::find(chosen.begin(), chosen.end(), u) == chosen.end())
        chosen.push_back(u);
    }
    for (NodeId u : chosen) {
      undirected.emplace_back(v, u);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  for (auto [a, b] : undirected) {
    ds.edges.emplace_back(a, b);
    ds.edges.emplace_back(b, a);
  }

  ds.labels.resize(params.num_nodes);
  Rng label_rng(mix_seed(seed, 0x1abe1));
  for (auto& l : ds.labels)
    l = static_cast<std::int32_t>(label_rng.next_below(params.num_classes));
  fill_features_and_split(ds, 0, params.feat_noise, seed);
  return ds;
}

void save_dataset(const std::string& dir, const SyntheticDataset& ds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::ofstream edges(fs::path(dir) / "edges.txt");
  if (!edges) throw std::runtime_error("cannot write edges.txt");
  for (auto [s, d] : ds.edges) edges << s << ' ' << d << '\n';

  write_matrix_file((fs::path(dir) / "features.bin").string(), ds.features);

  DenseMatrix labels(ds.num_nodes, 1);
  for (std::uint64_t v = 0; v < ds.num_nodes; ++v)
    labels.at(v, 0) = static_cast<float>(ds.labels[v]);
  write_matrix_file((fs::path(dir) / "labels.bin").string(), labels);

  DenseMatrix masks(ds.num_nodes, 1);
  for (std::uint64_t v = 0; v < ds.num_nodes; ++v)
    masks.at(v, 0) = static_cast<float>(ds.split[v]);
  write_matrix_file((fs::path(dir) / "masks.bin").string(), masks);

  DenseMatrix balance(ds.num_nodes, 2);
  for (std::uint64_t v = 0; v < ds.num_nodes; ++v) {
    balance.at(v, 0) = 1.0f;
    balance.at(v, 1) = ds.split[v] == 0 ? 1.0f : 0.0f;
  }
  write_matrix_file((fs::path(dir) / "balance_labels.bin").string(), balance);

  std::ofstream meta(fs::path(dir) / "meta.txt");
  meta << "kind: " << ds.kind << '\n'
       << "num_nodes: " << ds.num_nodes << '\n'
       << "num_edges: " << ds.edges.size() << '\n'
       << "num_classes: " << ds.num_classes << '\n'
       << "feat_dim: " << ds.features.cols << '\n'
       << "seed: " << ds.seed << '\n';
}

SyntheticDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  SyntheticDataset ds;

  std::ifstream meta(fs::path(dir) / "meta.txt");
  if (!meta) throw std::runtime_error("cannot read meta.txt in " + dir);
  std::string key;
  while (meta >> key) {
    if (key == "kind:")
      meta >> ds.kind;
    else if (key == "num_nodes:")
      meta >> ds.num_nodes;
    else if (key == "num_classes:")
      meta >> ds.num_classes;
    else if (key == "seed:")
      meta >> ds.seed;
    else {
      std::string skip;
      meta >> skip;
    }
  }

  ds.edges = read_edge_list((fs::path(dir) / "edges.txt").string());
  ds.features = read_matrix_file((fs::path(dir) / "features.bin").string());
  DenseMatrix labels = read_matrix_file((fs::path(dir) / "labels.bin").string());
  DenseMatrix masks = read_matrix_file((fs::path(dir) / "masks.bin").string());
  ds.labels.resize(ds.num_nodes);
  ds.split.resize(ds.num_nodes);
  for (std::uint64_t v = 0; v < ds.num_nodes; ++v) {
    ds.labels[v] = static_cast<std::int32_t>(labels.at(v, 0));
    ds.split[v] = static_cast<std::uint8_t>(masks.at(v, 0));
  }
  return ds;
}

}  // namespace minisage
