#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "vecset/errors.hpp"

// Little-endian scalar I/O shared by the binary file formats.
namespace vecset::binio {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    if constexpr (sizeof(T) == 4) {
      auto u = __builtin_bswap32(std::bit_cast<std::uint32_t>(v));
      return std::bit_cast<T>(u);
    } else {
      auto u = __builtin_bswap64(std::bit_cast<std::uint64_t>(v));
      return std::bit_cast<T>(u);
    }
  }
  return v;
}

template <typename T>
void write(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void write_floats(std::ostream& out, std::span<const float> v) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
  } else {
    for (float x : v) write(out, x);
  }
}

/// Returns false on clean EOF before any byte was read; throws on a partial read.
template <typename T>
bool try_read(std::istream& in, T& v, const std::string& what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  auto got = in.gcount();
  if (got == 0) return false;
  if (got != static_cast<std::streamsize>(sizeof(T))) throw FormatError(what + ": truncated");
  v = to_little(v);
  return true;
}

template <typename T>
T read(std::istream& in, const std::string& what) {
  T v{};
  if (!try_read(in, v, what)) throw FormatError(what + ": unexpected end of file");
  return v;
}

inline void read_floats(std::istream& in, std::span<float> v, const std::string& what) {
  auto bytes = static_cast<std::streamsize>(v.size() * sizeof(float));
  in.read(reinterpret_cast<char*>(v.data()), bytes);
  if (in.gcount() != bytes) throw FormatError(what + ": truncated");
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& x : v) x = to_little(x);
  }
}

}  // namespace vecset::binio
