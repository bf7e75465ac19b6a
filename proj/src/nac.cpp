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

#include "neutrex/nac.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "json.hpp"
#include "neutrex/error.hpp"

namespace neutrex::nac {
namespace {

constexpr char kMagic[4] = {'N', 'A', 'C', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

const char* dtype_name(Dtype d) { return d == Dtype::f32 ? "f32" : "u32"; }

}  // namespace

Array Array::make_f32(std::vector<std::size_t> shape, std::vector<float> data) {
  if (product(shape) != data.size()) {
    throw ValidationError("nac: f32 array data size does not match shape");
  }
  Array a;
  a.dtype = Dtype::f32;
  a.shape = std::move(shape);
  a.f32 = std::move(data);
  return a;
}

Array Array::make_u32(std::vector<std::size_t> shape, std::vector<std::uint32_t> data) {
  if (product(shape) != data.size()) {
    throw ValidationError("nac: u32 array data size does not match shape");
  }
  Array a;
  a.dtype = Dtype::u32;
  a.shape = std::move(shape);
  a.u32 = std::move(data);
  return a;
}

std::size_t Array::element_count() const { return product(shape); }

std::vector<std::uint8_t> encode(const ArrayMap& arrays) {
  nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
  std::size_t offset = 0;
  for (const auto& [name, array] : arrays) {
    const std::size_t count =
        array.dtype == Dtype::f32 ? array.f32.size() : array.u32.size();
    if (count != array.element_count()) {
      throw ValidationError("nac: array '" + name + "' data size does not match shape");
    }
    const std::size_t length = count * 4;
    manifest[name] = {{"dtype", dtype_name(array.dtype)},
                      {"shape", array.shape},
                      {"offset", offset},
                      {"length", length}};
    offset += length;
  }
  const std::string text = manifest.dump();
  if (text.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("nac: manifest too large");
  }

  std::vector<std::uint8_t> out;
  out.reserve(8 + text.size() + offset);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, array] : arrays) {
    if (array.dtype == Dtype::f32) {
      for (float f : array.f32) put_u32(out, std::bit_cast<std::uint32_t>(f));
    } else {
      for (std::uint32_t u : array.u32) put_u32(out, u);
    }
  }
  return out;
}

ArrayMap decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError("nac: bad magic (expected \"NAC1\")");
  }
  const std::size_t manifest_len = get_u32(bytes.data() + 4);
  if (8 + manifest_len > bytes.size()) {
    throw ValidationError("nac: manifest length exceeds file size");
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + manifest_len);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("nac: manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object()) throw ValidationError("nac: manifest must be a JSON object");

  const std::uint8_t* payload = bytes.data() + 8 + manifest_len;
  const std::size_t payload_size = bytes.size() - 8 - manifest_len;

  ArrayMap out;
  for (const auto& [name, entry] : manifest.items()) {
    const std::string where = "nac: array '" + name + "': ";
    try {
      const std::string dtype = entry.at("dtype").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      if (dtype != "f32" && dtype != "u32") throw ValidationError(where + "unknown dtype " + dtype);
      const std::size_t count = product(shape);
      if (length != count * 4) {
        throw ValidationError(where + "length " + std::to_string(length) +
                              " does not match shape (" + std::to_string(count) + " elements)");
      }
      if (offset > payload_size || length > payload_size - offset) {
        throw ValidationError(where + "payload range out of bounds");
      }
      Array a;
      a.shape = shape;
      const std::uint8_t* p = payload + offset;
      if (dtype == "f32") {
        a.dtype = Dtype::f32;
        a.f32.resize(count);
        for (std::size_t i = 0; i < count; ++i) a.f32[i] = std::bit_cast<float>(get_u32(p + 4 * i));
      } else {
        a.dtype = Dtype::u32;
        a.u32.resize(count);
        for (std::size_t i = 0; i < count; ++i) a.u32[i] = get_u32(p + 4 * i);
      }
      out.emplace(name, std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "malformed manifest entry: " + e.what());
    }
  }
  return out;
}

ArrayMap read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open asset file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading asset file " + path.string());
  return decode(bytes);
}

void write_file(const std::filesystem::path& path, const ArrayMap& arrays) {
  const auto bytes = encode(arrays);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace neutrex::nac
