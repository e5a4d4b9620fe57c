// mtl/io.cc

// Copyright 2026 The mtlspeech Authors
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

#include "mtl/io.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mtl/errors.h"

namespace mtl {
namespace {

template <typename U>
void put_le(std::ostream& os, U v) {
  char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i)
    b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, sizeof(U));
}

template <typename U>
U get_le(std::istream& is) {
  unsigned char b[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(U)))
    throw DataError("unexpected end of binary input");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { put_le(os, v); }
void write_f32(std::ostream& os, float v) {
  put_le(os, std::bit_cast<std::uint32_t>(v));
}
void write_f64(std::ostream& os, double v) {
  put_le(os, std::bit_cast<std::uint64_t>(v));
}
std::uint32_t read_u32(std::istream& is) { return get_le<std::uint32_t>(is); }
float read_f32(std::istream& is) {
  return std::bit_cast<float>(get_le<std::uint32_t>(is));
}
double read_f64(std::istream& is) {
  return std::bit_cast<double>(get_le<std::uint64_t>(is));
}

void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what) {
  char b[4];
  if (!is.read(b, 4) || std::memcmp(b, magic, 4) != 0)
    throw DataError(what + ": bad magic, expected \"" + std::string(magic) + "\"");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string text;
  for (const Json& r : rows) {
    text += r.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace mtl
