#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace costi {

/// Raised for invalid input, invalid configuration, and malformed files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WarningSink = std::function<void(const std::string&)>;

/// Routes a non-fatal diagnostic to the installed sink (stderr by default).
void warn(const std::string& message);

/// Installs a new sink and returns the previous one. Passing an empty
/// function restores the default stderr sink.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace costi
