// SPDX-License-Identifier: Apache-2.0
//
// arrayopt - sparse phased-array layout optimization with neural surrogates
// Copyright (C) 2026 The arrayopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "arrayopt/autodiff.hpp"

namespace arrayopt {

// "NNW1" container: magic, u32 architecture id, u32 parameter count, then per
// parameter u32 name length, name bytes, u32 rank, u64 dims, float64 values.
// Little-endian throughout.
struct WeightFile {
  std::uint32_t arch_id = 0;
  std::vector<Parameter> params;
};

std::string serialize_weights(std::uint32_t arch_id, std::span<const Parameter> params);
WeightFile parse_weights(const std::string& bytes);

void write_weights(const std::string& path, std::uint32_t arch_id, std::span<const Parameter> params);
WeightFile read_weights(const std::string& path);

}  // namespace arrayopt
