// mtl/checkpoint.h

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

#ifndef MTL_CHECKPOINT_H_
#define MTL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>

#include "mtl/model.h"

namespace mtl {

// "MTLC" container: magic, version u32, length-prefixed ModelConfig JSON,
// then one block per parameter until end of file: name length u32, name,
// rank u32, dims u32..., little-endian float64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Writes via a temporary file and rename, so an existing checkpoint is never
// left half-written.
void save_checkpoint(const std::filesystem::path& path, const JointModel& model);
JointModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mtl

#endif  // MTL_CHECKPOINT_H_
