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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "fhvc/core/kernels.hpp"

namespace fhvc::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

// y[0..n) += alpha * x[0..n)
inline void axpy_row(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    _mm256_storeu_pd(y + j + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4)));
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

void gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
  }
  const bool at = ta == Trans::yes;
  if (tb == Trans::no) {
    // Four rows of C share each loaded row of B.
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      double* c0 = c + i * n;
      double* c1 = c0 + n;
      double* c2 = c1 + n;
      double* c3 = c2 + n;
      for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n;
        const double a0 = at ? a[p * m + i] : a[i * k + p];
        const double a1 = at ? a[p * m + i + 1] : a[(i + 1) * k + p];
        const double a2 = at ? a[p * m + i + 2] : a[(i + 2) * k + p];
        const double a3 = at ? a[p * m + i + 3] : a[(i + 3) * k + p];
        const __m256d v0 = _mm256_set1_pd(a0);
        const __m256d v1 = _mm256_set1_pd(a1);
        const __m256d v2 = _mm256_set1_pd(a2);
        const __m256d v3 = _mm256_set1_pd(a3);
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
          const __m256d bv = _mm256_loadu_pd(brow + j);
          _mm256_storeu_pd(c0 + j, _mm256_fmadd_pd(v0, bv, _mm256_loadu_pd(c0 + j)));
          _mm256_storeu_pd(c1 + j, _mm256_fmadd_pd(v1, bv, _mm256_loadu_pd(c1 + j)));
          _mm256_storeu_pd(c2 + j, _mm256_fmadd_pd(v2, bv, _mm256_loadu_pd(c2 + j)));
          _mm256_storeu_pd(c3 + j, _mm256_fmadd_pd(v3, bv, _mm256_loadu_pd(c3 + j)));
        }
        for (; j < n; ++j) {
          c0[j] += a0 * brow[j];
          c1[j] += a1 * brow[j];
          c2[j] += a2 * brow[j];
          c3[j] += a3 * brow[j];
        }
      }
    }
    for (; i < m; ++i) {
      double* crow = c + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        axpy_row(n, at ? a[p * m + i] : a[i * k + p], b + p * n, crow);
      }
    }
    return;
  }
  if (!at) {
    for (std::size_t i = 0; i < m; ++i) {
      const double* arow = a + i * k;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, arow, b + j * k);
    }
    return;
  }
  // Aᵀ·Bᵀ never occurs on hot paths; gather the column of A once per row.
  std::vector<double> col(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) col[p] = a[p * m + i];
    for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot(k, col.data(), b + j * k);
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) { axpy_row(n, alpha, x, y); }

template <typename F, typename S>
inline void binary(std::size_t n, const double* x, const double* y, double* out, F vec, S sc) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, vec(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = sc(x[i], y[i]);
}

void add(std::size_t n, const double* x, const double* y, double* out) {
  binary(
      n, x, y, out, [](__m256d a, __m256d b) { return _mm256_add_pd(a, b); },
      [](double a, double b) { return a + b; });
}

void sub(std::size_t n, const double* x, const double* y, double* out) {
  binary(
      n, x, y, out, [](__m256d a, __m256d b) { return _mm256_sub_pd(a, b); },
      [](double a, double b) { return a - b; });
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
  binary(
      n, x, y, out, [](__m256d a, __m256d b) { return _mm256_mul_pd(a, b); },
      [](double a, double b) { return a * b; });
}

void mul_acc(std::size_t n, const double* x, const double* y, double* acc) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                              _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) acc[i] += x[i] * y[i];
}

}  // namespace

const Table& avx2_table() {
  static const Table t{Isa::avx2, "avx2", gemm, axpy, dot, add, sub, mul, mul_acc};
  return t;
}

}  // namespace fhvc::kernels
