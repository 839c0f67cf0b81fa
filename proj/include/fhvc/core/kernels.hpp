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

// Dense double-precision kernels behind the autodiff graph. Every kernel has
// a scalar reference implementation; vectorized variants (AVX2+FMA on x86-64,
// NEON on AArch64) are selected once at startup from CPU capabilities and can
// be overridden with FHVC_KERNELS=scalar|avx2|neon.
//
// All buffers are contiguous row-major. Variants may differ from the scalar
// reference by rounding only (FMA contraction, lane-wise partial sums); within
// one variant results are bit-reproducible.

#include <cstddef>
#include <string_view>
#include <vector>

namespace fhvc::kernels {

enum class Isa { scalar, avx2, neon };

enum class Trans : bool { no = false, yes = true };

struct Table {
  Isa isa;
  const char* name;

  // C(m×n) = op(A)·op(B), or C += op(A)·op(B) when accumulate is set.
  // op(A) is m×k: A is stored m×k, or k×m when ta == yes.
  // op(B) is k×n: B is stored k×n, or n×k when tb == yes.
  void (*gemm)(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k,
               const double* a, const double* b, double* c, bool accumulate);

  // y += alpha·x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);

  void (*add)(std::size_t n, const double* x, const double* y, double* out);
  void (*sub)(std::size_t n, const double* x, const double* y, double* out);
  void (*mul)(std::size_t n, const double* x, const double* y, double* out);
  // acc += x·y
  void (*mul_acc)(std::size_t n, const double* x, const double* y, double* acc);
};

const Table& scalar_table();
#if defined(FHVC_HAVE_AVX2)
const Table& avx2_table();
#endif
#if defined(FHVC_HAVE_NEON)
const Table& neon_table();
#endif

bool is_supported(Isa isa);
// Throws std::invalid_argument if the variant is not compiled in or the CPU
// lacks the instructions.
const Table& table(Isa isa);
std::vector<Isa> supported_isas();

const Table& active();
// Not synchronized; call before starting worker threads.
void set_active(Isa isa);

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

}  // namespace fhvc::kernels
