#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace billiard {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// A numerical procedure could not deliver its contract (bracketing failed,
/// linear solve diverged, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested geometry or parameter set is outside what the model covers.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

using WarningHandler = std::function<void(std::string_view)>;

namespace detail {
inline std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}
inline WarningHandler& warning_handler() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}
}  // namespace detail

/// Replaces the sink for soft diagnostics; returns the previous one.
inline WarningHandler set_warning_handler(WarningHandler handler) {
  std::scoped_lock lock(detail::warning_mutex());
  auto old = std::move(detail::warning_handler());
  detail::warning_handler() = std::move(handler);
  return old;
}

inline void warn(std::string_view message) {
  std::scoped_lock lock(detail::warning_mutex());
  if (detail::warning_handler()) detail::warning_handler()(message);
}

/// Worker count: BILLIARD_THREADS if set, else hardware concurrency.
inline unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BILLIARD_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

/// Runs body(i) for i in [0, count) on up to thread_budget() threads.
template <class F>
void parallel_for(std::size_t count, F&& body) {
  const std::size_t workers = std::min<std::size_t>(thread_budget(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace billiard
