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

#ifndef PSRN_NUMCORE_BINARY_IO_HPP_
#define PSRN_NUMCORE_BINARY_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace psrn::numcore {

// Little-endian byte sink, independent of host byte order.
class ByteWriter {
 public:
  void bytes(std::string_view data) { out_.append(data); }
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  const std::string& str() const { return out_; }

 private:
  void uint(std::uint64_t v, int width);
  std::string out_;
};

// Little-endian byte source. Every read past the end throws FormatError
// naming the byte offset and what was being read.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t count, const char* what);
  std::uint32_t u32(const char* what);
  float f32(const char* what);
  double f64(const char* what);

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t uint(int width, const char* what);
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::string& bytes);

}  // namespace psrn::numcore

#endif  // PSRN_NUMCORE_BINARY_IO_HPP_
