// Copyright 2026 The specattr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian encode/decode helpers shared by the binary formats.

#ifndef SPECATTR_SRC_BYTE_IO_H_
#define SPECATTR_SRC_BYTE_IO_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specattr::internal {

inline void AppendU32(std::vector<std::byte>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

inline void AppendF32(std::vector<std::byte>& out, float v) {
  AppendU32(out, std::bit_cast<uint32_t>(v));
}

inline void AppendText(std::vector<std::byte>& out, std::string_view text) {
  for (char c : text) out.push_back(static_cast<std::byte>(c));
}

inline uint32_t ReadU32(std::span<const std::byte> in, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(std::to_integer<uint8_t>(in[offset + i])) << (8 * i);
  }
  return v;
}

inline float ReadF32(std::span<const std::byte> in, size_t offset) {
  return std::bit_cast<float>(ReadU32(in, offset));
}

// Both throw IoError.
std::vector<std::byte> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::span<const std::byte> bytes);
void WriteFileText(const std::filesystem::path& path, std::string_view text);

}  // namespace specattr::internal

#endif  // SPECATTR_SRC_BYTE_IO_H_
