/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/trainer.hpp
 * @brief Training-set splitting and per-epoch metrics.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minisage/partition_book.hpp"

namespace minisage {

/// Per-trainer training-vertex shards, indexed by global trainer rank
/// (machine-major: rank = machine * trainers_per_machine + local trainer).
struct WorkloadSplit {
  std::vector<std::vector<NodeId>> shards;
};

/// Two-level split. Level 1: training ids (relabeled, sorted) are cut into
/// equal per-machine ranges; each range goes to the machine whose partition
/// overlaps it most (ties to the lower machine index). Level 2: a machine's
/// training vertices are dealt round-robin to its trainers.
WorkloadSplit split_training_set(const PartitionBook& book,
                                 std::span<const std::uint8_t> train_mask,
                                 std::uint32_t trainers_per_machine);

struct EpochStats {
  double sample_s = 0.0;            // stall waiting on the sampling pipeline
  double data_copy_s = 0.0;         // feature/label pulls
  double forward_backward_s = 0.0;
  double sync_s = 0.0;              // allreduce + dense update
  double epoch_s = 0.0;
  std::uint64_t iterations = 0;
  double loss = 0.0;
  double locality_fraction = 0.0;   // input nodes owned by the seeding machine
  double val_acc = -1.0;
  double test_acc = -1.0;
};

/// Appends one structured-text record (key: value lines + blank line).
void append_metrics_record(const std::string& path, std::uint32_t epoch, const EpochStats& s);

}  // namespace minisage
