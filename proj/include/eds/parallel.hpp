#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace eds {

// Serial is the reference path; Parallel must produce bit-identical output.
enum class Execution { Serial, Parallel };

// Runs fn(i) for i in [0, n). Work items must be independent. The first
// exception (lowest index) is rethrown after all items finish.
template <class Fn>
void for_each_index(std::size_t n, Execution exec, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < count; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int available_threads() noexcept;

}  // namespace eds
