// Copyright 2026 the qfsru authors
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

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qfsru {

// Independent, reproducible generator for a named consumer ("shuffle",
// "dropout", "init", ...) derived from a run seed.
std::mt19937_64 rng_stream(std::uint64_t seed, std::string_view name);

// Stable 64-bit FNV-1a hash.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace qfsru
