// mtl/checkpoint.cc

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

#include "mtl/checkpoint.h"

#include <fstream>

#include "mtl/errors.h"
#include "mtl/io.h"

namespace mtl {
namespace fs = std::filesystem;

void save_checkpoint(const fs::path& path, const JointModel& model) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot write checkpoint " + tmp.string());
    write_magic(os, "MTLC");
    write_u32(os, kCheckpointVersion);
    const std::string cfg = model.config().to_json().dump();
    write_u32(os, static_cast<std::uint32_t>(cfg.size()));
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    const ParameterSet& ps = model.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string& name = ps.names()[i];
      const Tensor& t = ps.at(i);
      write_u32(os, static_cast<std::uint32_t>(name.size()));
      os.write(name.data(), static_cast<std::streamsize>(name.size()));
      write_u32(os, static_cast<std::uint32_t>(t.rank()));
      for (std::size_t d : t.shape()) write_u32(os, static_cast<std::uint32_t>(d));
      for (double v : t.data()) write_f64(os, v);
    }
    if (!os) throw DataError("short write on checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

JointModel load_checkpoint(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  expect_magic(is, "MTLC", "checkpoint " + path.string());
  const std::uint32_t version = read_u32(is);
  if (version != kCheckpointVersion)
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t cfg_len = read_u32(is);
  if (cfg_len > (1u << 24)) throw DataError(path.string() + ": corrupt config length");
  std::string cfg(cfg_len, '\0');
  is.read(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  if (!is) throw DataError(path.string() + ": truncated config block");
  ModelConfig config;
  try {
    config = ModelConfig::from_json(Json::parse(cfg));
  } catch (const Json::exception& e) {
    throw DataError(path.string() + ": bad config block: " + e.what());
  }

  ParameterSet params;
  while (is.peek() != std::char_traits<char>::eof()) {
    const std::uint32_t len = read_u32(is);
    if (len == 0 || len > 4096) throw DataError(path.string() + ": corrupt parameter name length");
    std::string name(len, '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    const std::uint32_t rank = read_u32(is);
    if (!is || rank == 0 || rank > 4)
      throw DataError(path.string() + ": corrupt parameter block '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) d = read_u32(is);
    Tensor t(shape);
    for (double& v : t.data()) v = read_f64(is);
    params.add(name, std::move(t));
  }
  return JointModel(std::move(config), std::move(params));
}

}  // namespace mtl
