// binary-io.h

// Copyright 2026  The nplda-backend Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Little-endian primitives shared by the archive and model readers/writers.

#ifndef NPLDA_BINARY_IO_H_
#define NPLDA_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "nplda/error.h"

namespace nplda::internal {

template <typename T>
T ToLittleEndian(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
      std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <typename T>
void WritePod(std::ostream &os, T value) {
  value = ToLittleEndian(value);
  os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

/// Throws DataError(kTruncated) when the stream ends early.
template <typename T>
T ReadPod(std::istream &is, std::size_t record = 0) {
  T value;
  is.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    throw DataError(DataError::Kind::kTruncated, "unexpected end of data",
                    record);
  return ToLittleEndian(value);
}

inline void WriteString(std::ostream &os, const std::string &s) {
  WritePod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string ReadString(std::istream &is, std::size_t record = 0) {
  const auto size = ReadPod<std::uint32_t>(is, record);
  // Guards against reading a garbage length from a corrupt file.
  if (size > (1u << 24))
    throw DataError(DataError::Kind::kMalformedHeader,
                    "string length " + std::to_string(size) + " is too large",
                    record);
  std::string s(size, '\0');
  is.read(s.data(), size);
  if (is.gcount() != static_cast<std::streamsize>(size))
    throw DataError(DataError::Kind::kTruncated, "unexpected end of data",
                    record);
  return s;
}

}  // namespace nplda::internal

#endif  // NPLDA_BINARY_IO_H_
