/* Copyright 2026 The PSRN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "psrn/numcore/binary_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "psrn/numcore/error.hpp"

namespace psrn::numcore {

void ByteWriter::uint(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

void ByteWriter::u32(std::uint32_t v) { uint(v, 4); }
void ByteWriter::f32(float v) { uint(std::bit_cast<std::uint32_t>(v), 4); }
void ByteWriter::f64(double v) { uint(std::bit_cast<std::uint64_t>(v), 8); }

std::string_view ByteReader::bytes(std::size_t count, const char* what) {
  if (remaining() < count) {
    throw FormatError("truncated input at byte offset " +
                      std::to_string(pos_) + " while reading " + what +
                      " (need " + std::to_string(count) + " bytes, have " +
                      std::to_string(remaining()) + ")");
  }
  std::string_view out = data_.substr(pos_, count);
  pos_ += count;
  return out;
}

std::uint64_t ByteReader::uint(int width, const char* what) {
  std::string_view raw = bytes(static_cast<std::size_t>(width), what);
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i]))
         << (8 * i);
  }
  return v;
}

std::uint32_t ByteReader::u32(const char* what) {
  return static_cast<std::uint32_t>(uint(4, what));
}

float ByteReader::f32(const char* what) {
  return std::bit_cast<float>(static_cast<std::uint32_t>(uint(4, what)));
}

double ByteReader::f64(const char* what) {
  return std::bit_cast<double>(uint(8, what));
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace psrn::numcore
