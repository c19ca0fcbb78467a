#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace mems {

template <class R>
struct TaskResult {
  std::optional<R> value;
  std::string error;  // set when value is empty
};

/// Evaluates fn(0), ..., fn(n-1) on up to `jobs` worker threads. Results are
/// stored by index, so the output order does not depend on scheduling.
/// Exceptions are captured per task.
template <class R, class Fn>
std::vector<TaskResult<R>> parallel_map(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<TaskResult<R>> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i].value.emplace(fn(i));
      } catch (const std::exception& e) {
        out[i].error = e.what();
      } catch (...) {
        out[i].error = "unknown error";
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace mems
