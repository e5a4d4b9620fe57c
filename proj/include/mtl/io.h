// mtl/io.h

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

#ifndef MTL_IO_H_
#define MTL_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtl {

using Json = nlohmann::ordered_json;

// Little-endian binary primitives. Readers throw DataError on short input.
void write_u32(std::ostream& os, std::uint32_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
std::uint32_t read_u32(std::istream& is);
float read_f32(std::istream& is);
double read_f64(std::istream& is);
void write_magic(std::ostream& os, const char (&magic)[5]);
void expect_magic(std::istream& is, const char (&magic)[5], const std::string& what);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// One JSON object per line; blank lines are skipped.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

// Fixed formatting for every real number written to a text artifact, so
// reports are byte-stable: shortest round-trip representation.
std::string format_real(double v);

}  // namespace mtl

#endif  // MTL_IO_H_
