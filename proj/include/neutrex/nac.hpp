// Copyright 2026 The neutrex-quality Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Named-array container (".nac").
//
// Layout:
//   bytes 0..3   magic "NAC1"
//   bytes 4..7   u32 little-endian manifest length M
//   bytes 8..8+M UTF-8 JSON manifest:
//                  {"<name>": {"dtype": "f32"|"u32", "shape": [...],
//                              "offset": <bytes>, "length": <bytes>}, ...}
//   remainder    concatenated little-endian payload; "offset" is relative
//                to the first payload byte.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace neutrex::nac {

enum class Dtype { f32, u32 };

struct Array {
  Dtype dtype = Dtype::f32;
  std::vector<std::size_t> shape;
  std::vector<float> f32;          // populated when dtype == f32
  std::vector<std::uint32_t> u32;  // populated when dtype == u32

  static Array make_f32(std::vector<std::size_t> shape, std::vector<float> data);
  static Array make_u32(std::vector<std::size_t> shape,
                        std::vector<std::uint32_t> data);

  std::size_t element_count() const;
};

using ArrayMap = std::map<std::string, Array>;

std::vector<std::uint8_t> encode(const ArrayMap& arrays);
ArrayMap decode(const std::vector<std::uint8_t>& bytes);

/// Throws IoError when the file cannot be read, ValidationError (naming the
/// array where applicable) when the contents are malformed.
ArrayMap read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const ArrayMap& arrays);

}  // namespace neutrex::nac
