#include "ideaspace/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace ideaspace {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink;
  return sink;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  if (current_sink()) {
    current_sink()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  return std::exchange(current_sink(), std::move(sink));
}

ScopedWarningCapture::ScopedWarningCapture(
    std::function<void(const std::string&)> on_warning)
    : previous_(set_warning_sink(std::move(on_warning))) {}

ScopedWarningCapture::~ScopedWarningCapture() {
  set_warning_sink(std::move(previous_));
}

}  // namespace ideaspace
