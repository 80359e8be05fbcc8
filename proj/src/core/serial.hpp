#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace deepsad {

// Explicit little-endian binary encoding, independent of host byte order.
// All model files use these primitives; floats are IEEE-754 binary64.

inline void write_u8(std::ostream& os, uint8_t x) {
  os.put(static_cast<char>(x));
}

inline void write_u32(std::ostream& os, uint32_t x) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((x >> (8 * i)) & 0xff));
}

inline void write_u64(std::ostream& os, uint64_t x) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((x >> (8 * i)) & 0xff));
}

inline void write_f64(std::ostream& os, double x) {
  write_u64(os, std::bit_cast<uint64_t>(x));
}

inline void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_f64_array(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  for (double x : v) write_f64(os, x);
}

inline uint8_t read_u8(std::istream& is) {
  const int c = is.get();
  require(c != EOF, ErrorCode::Format, "unexpected end of model file");
  return static_cast<uint8_t>(c);
}

inline uint32_t read_u32(std::istream& is) {
  uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(read_u8(is)) << (8 * i);
  return x;
}

inline uint64_t read_u64(std::istream& is) {
  uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(read_u8(is)) << (8 * i);
  return x;
}

inline double read_f64(std::istream& is) {
  return std::bit_cast<double>(read_u64(is));
}

inline std::string read_string(std::istream& is) {
  const uint32_t n = read_u32(is);
  require(n <= (1u << 28), ErrorCode::Format, "model file: string too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  require(static_cast<uint32_t>(is.gcount()) == n, ErrorCode::Format,
          "unexpected end of model file");
  return s;
}

inline std::vector<double> read_f64_array(std::istream& is) {
  const uint64_t n = read_u64(is);
  require(n <= (1ull << 32), ErrorCode::Format, "model file: array too long");
  std::vector<double> v(n);
  for (auto& x : v) x = read_f64(is);
  return v;
}

}  // namespace deepsad
