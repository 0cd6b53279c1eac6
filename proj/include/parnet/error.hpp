#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace parnet {

/// Raised for every contract violation the library detects (bad input,
/// degenerate data, malformed files). The message is meant for humans.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace diag {

using WarningSink = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
inline WarningSink& sink() {
  static WarningSink s = [](const std::string& msg) {
    std::cerr << "parnet: warning: " << msg << '\n';
  };
  return s;
}
}  // namespace detail

/// Replaces the process-wide warning sink; returns the previous one.
inline WarningSink set_warning_sink(WarningSink s) {
  std::lock_guard lock(detail::sink_mutex());
  auto old = std::move(detail::sink());
  detail::sink() = std::move(s);
  return old;
}

inline void warn(const std::string& msg) {
  std::lock_guard lock(detail::sink_mutex());
  if (detail::sink()) detail::sink()(msg);
}

}  // namespace diag
}  // namespace parnet
