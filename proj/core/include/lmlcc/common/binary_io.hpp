#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "lmlcc/common/error.hpp"

namespace lmlcc::io {

template <typename T>
T byteswap_value(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) {
    std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    return byteswap_value(value);
  }
}

template <typename T>
T from_little_endian(T value) {
  return to_little_endian(value);
}

template <typename T>
void write_le(std::ostream& out, T value) {
  const T le = to_little_endian(value);
  out.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) {
    throw ParseError(std::string("unexpected end of stream while reading ") + what);
  }
  return from_little_endian(value);
}

inline void write_string(std::ostream& out, const std::string& s) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, const char* what) {
  const auto n = read_le<std::uint32_t>(in, what);
  if (n > (1u << 24)) {
    throw ParseError(std::string("implausible string length for ") + what);
  }
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) {
    throw ParseError(std::string("unexpected end of stream while reading ") + what);
  }
  return s;
}

}  // namespace lmlcc::io
