/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/ids.hpp
 * @brief Global/local ID spaces and error types shared across the system.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace minisage {

// Relabeled global vertex/edge IDs. After partitioning, the IDs owned by one
// partition form a contiguous range, so ownership resolves by range lookup.
using NodeId = std::uint64_t;
using EdgeId = std::uint64_t;

// ID within one partition. Core vertices occupy [0, num_core).
using LocalId = std::uint64_t;

using PartId = std::uint32_t;

/// A caller violated a locality or core-vertex contract.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Connection, framing, timeout, or collective failure.
class TransportError : public std::runtime_error {
 public:
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

/// Balance constraints cannot be met for any assignment.
class ConstraintInfeasible : public std::runtime_error {
 public:
  explicit ConstraintInfeasible(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace minisage
