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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fhvc/core/kernels.hpp"

namespace fhvc::kernels {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(FHVC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(FHVC_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Table& best_available() {
  if (const char* env = std::getenv("FHVC_KERNELS"); env != nullptr && *env != '\0') {
    return table(parse_isa(env));
  }
  if (cpu_has(Isa::avx2)) return table(Isa::avx2);
  if (cpu_has(Isa::neon)) return table(Isa::neon);
  return scalar_table();
}

const Table*& active_slot() {
  static const Table* slot = &best_available();
  return slot;
}

}  // namespace

bool is_supported(Isa isa) { return cpu_has(isa); }

const Table& table(Isa isa) {
  if (!cpu_has(isa)) {
    throw std::invalid_argument("kernel variant '" + std::string(isa_name(isa)) +
                                "' is not available on this build/CPU");
  }
  switch (isa) {
#if defined(FHVC_HAVE_AVX2)
    case Isa::avx2:
      return avx2_table();
#endif
#if defined(FHVC_HAVE_NEON)
    case Isa::neon:
      return neon_table();
#endif
    default:
      return scalar_table();
  }
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (cpu_has(isa)) out.push_back(isa);
  }
  return out;
}

const Table& active() { return *active_slot(); }

void set_active(Isa isa) { active_slot() = &table(isa); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  throw std::invalid_argument("unknown kernel variant '" + std::string(name) + "'");
}

}  // namespace fhvc::kernels
