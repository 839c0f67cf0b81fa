// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <string_view>

#include "fhvc/core/tensor.hpp"

namespace fhvc {

/// Counter-based generator: output n of a stream is a pure function of
/// (key, n), so a substream's values never depend on how many draws other
/// modules made first. `stream(label)` derives an independent child key.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  SeededRng stream(std::string_view label) const;
  SeededRng stream(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  SeededRng(std::uint64_t seed, std::uint64_t key) : seed_(seed), key_(key) {}

  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_label(std::string_view label);

/// i.i.d. N(0, 1) entries.
Tensor standard_normal(const Shape& shape, SeededRng& rng);

}  // namespace fhvc
