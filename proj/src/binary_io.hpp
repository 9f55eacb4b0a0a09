#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "fusion/error.hpp"

namespace fusion::detail {

inline void write_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

inline std::uint32_t decode_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint32_t read_u32_le(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError(what + ": truncated");
  return decode_u32_le(bytes);
}

inline void write_f32_le(std::ostream& out, float f) { write_u32_le(out, std::bit_cast<std::uint32_t>(f)); }

inline float decode_f32_le(const unsigned char* p) { return std::bit_cast<float>(decode_u32_le(p)); }

}  // namespace fusion::detail
