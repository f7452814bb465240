// hsc/parallel.h
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HSC_PARALLEL_H_
#define HSC_PARALLEL_H_

#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hsc {

// Accumulating kernels split their input into fixed-size blocks, compute one
// partial result per block, and merge the partials in block order.  The block
// grid depends only on the input size, so results are bit-identical for any
// thread count (including an OpenMP-less build).
inline constexpr int kAccumBlock = 512;

inline int block_count(int n, int block = kAccumBlock) {
  return n <= 0 ? 0 : (n + block - 1) / block;
}

namespace internal {

// Exceptions must not escape an OpenMP region; the first one is rethrown
// after the loop.
class ExceptionGate {
 public:
  void capture() {
    std::lock_guard<std::mutex> lock(mu_);
    if (!ptr_) ptr_ = std::current_exception();
  }
  void rethrow() {
    if (ptr_) std::rethrow_exception(ptr_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr ptr_;
};

}  // namespace internal

// Runs fn(block_index, begin, end) over the fixed block grid of [0, n).
template <class Fn>
void parallel_blocks(int n, Fn&& fn, int block = kAccumBlock) {
  const int nblocks = block_count(n, block);
  internal::ExceptionGate gate;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < nblocks; ++b) {
    try {
      const int begin = b * block;
      const int end = begin + block < n ? begin + block : n;
      fn(b, begin, end);
    } catch (...) {
      gate.capture();
    }
  }
  gate.rethrow();
}

// Runs fn(i) for i in [0, n); every iteration writes only its own slot.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  internal::ExceptionGate gate;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      gate.capture();
    }
  }
  gate.rethrow();
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace hsc

#endif  // HSC_PARALLEL_H_
