#pragma once

#include <functional>
#include <string>

namespace ideaspace {

using WarningSink = std::function<void(const std::string&)>;

// Non-fatal diagnostics (skipped cache records, clamped scores, ...) go
// through a process-wide sink. The default writes to stderr.
void warn(const std::string& message);

// Installs `sink` and returns the previous one. Passing an empty function
// restores the stderr default.
WarningSink set_warning_sink(WarningSink sink);

// RAII helper that captures warnings for the lifetime of the object.
class ScopedWarningCapture {
 public:
  explicit ScopedWarningCapture(std::function<void(const std::string&)> on_warning);
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace ideaspace
