/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/trainer.cpp
 */
#include "minisage/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace minisage {

WorkloadSplit split_training_set(const PartitionBook& book,
                                 std::span<const std::uint8_t> train_mask,
                                 std::uint32_t trainers_per_machine) {
  if (train_mask.size() != book.num_nodes())
    throw std::invalid_argument("train mask size mismatch");
  if (trainers_per_machine == 0) throw std::invalid_argument("need at least one trainer");
  const std::uint32_t machines = book.num_parts;

  std::vector<NodeId> train_ids;
  for (NodeId g = 0; g < train_mask.size(); ++g)
    if (train_mask[g]) train_ids.push_back(g);  // ascending by construction

  const std::uint64_t total_trainers =
      static_cast<std::uint64_t>(machines) * trainers_per_machine;
  if (train_ids.size() < total_trainers)
    throw std::invalid_argument("fewer training vertices than trainers");

  // Level 1: equal contiguous ranges of the sorted id list, each assigned to
  // the machine owning most of it.
  std::vector<std::vector<NodeId>> per_machine(machines);
  const std::uint64_t n = train_ids.size();
  for (std::uint32_t m = 0; m < machines; ++m) {
    const std::uint64_t begin = n * m / machines;
    const std::uint64_t end = n * (m + 1) / machines;
    std::vector<std::uint64_t> overlap(machines, 0);
    for (std::uint64_t i = begin; i < end; ++i) ++overlap[book.node_owner(train_ids[i])];
    std::uint32_t winner = 0;
    for (std::uint32_t cand = 1; cand < machines; ++cand)
      if (overlap[cand] > overlap[winner]) winner = cand;
    auto& dst = per_machine[winner];
    dst.insert(dst.end(), train_ids.begin() + begin, train_ids.begin() + end);
  }

  // Level 2: round-robin within each machine.
  WorkloadSplit split;
  split.shards.resize(total_trainers);
  for (std::uint32_t m = 0; m < machines; ++m) {
    std::sort(per_machine[m].begin(), per_machine[m].end());
    for (std::size_t i = 0; i < per_machine[m].size(); ++i) {
      std::uint32_t t = static_cast<std::uint32_t>(i % trainers_per_machine);
      split.shards[static_cast<std::size_t>(m) * trainers_per_machine + t].push_back(
          per_machine[m][i]);
    }
  }
  return split;
}

void append_metrics_record(const std::string& path, std::uint32_t epoch, const EpochStats& s) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open metrics file: " + path);
  out << "epoch: " << epoch << '\n'
      << "iterations: " << s.iterations << '\n'
      << "sample_s: " << s.sample_s << '\n'
      << "data_copy_s: " << s.data_copy_s << '\n'
      << "forward_backward_s: " << s.forward_backward_s << '\n'
      << "sync_s: " << s.sync_s << '\n'
      << "epoch_s: " << s.epoch_s << '\n'
      << "loss: " << s.loss << '\n'
      << "locality_fraction: " << s.locality_fraction << '\n';
  if (s.val_acc >= 0.0) out << "val_acc: " << s.val_acc << '\n';
  if (s.test_acc >= 0.0) out << "test_acc: " << s.test_acc << '\n';
  out << '\n';
}

}  // namespace minisage
