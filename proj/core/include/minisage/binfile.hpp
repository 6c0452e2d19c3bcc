/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/binfile.hpp
 * @brief Versioned little-endian binary file helpers (magic "MDG1" / "MDT1").
 */
#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "minisage/bytes.hpp"

namespace minisage {

inline constexpr std::uint32_t kGraphFileVersion = 1;

// Section kinds inside MDG1 files.
inline constexpr std::uint32_t kMdgKindBook = 1;
inline constexpr std::uint32_t kMdgKindPartition = 2;

class BinFileWriter {
 public:
  BinFileWriter(const std::string& path, const char magic[4]) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for write: " + path);
    out_.write(magic, 4);
  }

  void put_u32(std::uint32_t v) { put_raw(&v, sizeof(v)); }
  void put_u64(std::uint64_t v) { put_raw(&v, sizeof(v)); }

  template <typename T>
  void put_array(const std::vector<T>& data) {
    static_assert(std::is_trivially_copyable_v<T>);
    put_u64(data.size());
    put_raw(data.data(), data.size() * sizeof(T));
  }

  void put_raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw std::runtime_error("short write");
  }

 private:
  std::ofstream out_;
};

class BinFileReader {
 public:
  BinFileReader(const std::string& path, const char magic[4]) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open for read: " + path);
    char got[4];
    get_raw(got, 4);
    if (std::memcmp(got, magic, 4) != 0)
      throw std::runtime_error("bad magic in " + path);
  }

  std::uint32_t get_u32() { return get<std::uint32_t>(); }
  std::uint64_t get_u64() { return get<std::uint64_t>(); }

  template <typename T>
  std::vector<T> get_array() {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint64_t n = get_u64();
    std::vector<T> out(n);
    get_raw(out.data(), n * sizeof(T));
    return out;
  }

  void get_raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n))
      throw std::runtime_error("truncated file");
  }

 private:
  template <typename T>
  T get() {
    T v;
    get_raw(&v, sizeof(v));
    return v;
  }

  std::ifstream in_;
};

}  // namespace minisage
