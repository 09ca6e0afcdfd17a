#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "avdelay/error.hpp"

// Little-endian primitives for the binary containers.
namespace avdelay::binio {

template <typename T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_u64(std::ostream& out, std::uint64_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_f64s(std::ostream& out, std::span<const double> values) {
  for (double d : values) put_u64(out, std::bit_cast<std::uint64_t>(d));
}
inline void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, void* dst, std::size_t n) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw SchemaError("truncated binary container");
}
inline std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v;
  read_exact(in, &v, sizeof v);
  return to_le(v);
}
inline std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v;
  read_exact(in, &v, sizeof v);
  return to_le(v);
}
inline void get_f64s(std::istream& in, std::span<double> out) {
  for (double& d : out) d = std::bit_cast<double>(get_u64(in));
}
inline std::string get_string(std::istream& in, std::uint64_t max_len = (1ULL << 32)) {
  const auto n = get_u64(in);
  if (n > max_len) throw SchemaError("string block too large");
  std::string s(n, '\0');
  read_exact(in, s.data(), n);
  return s;
}

}  // namespace avdelay::binio
