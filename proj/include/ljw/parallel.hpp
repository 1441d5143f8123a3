#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#include <omp.h>

namespace ljw {

/// Evaluates fn(i) for i = 0..n-1 in order on the calling thread. This is
/// the bit-exact reference for the parallel kernel below.
template <class T, class Fn>
std::vector<T> map_samples_serial(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
  return out;
}

/// OpenMP version of map_samples_serial. Each sample is a pure function of
/// its index and results land in index order, so any reduction done
/// afterwards is independent of the worker count.
template <class T, class Fn>
std::vector<T> map_samples_parallel(std::size_t n, int workers, Fn&& fn) {
  std::vector<T> out(n);
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// workers <= 1 selects the serial reference.
template <class T, class Fn>
std::vector<T> map_samples(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1) return map_samples_serial<T>(n, std::forward<Fn>(fn));
  return map_samples_parallel<T>(n, workers, std::forward<Fn>(fn));
}

}  // namespace ljw
