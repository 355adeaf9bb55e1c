#pragma once

#include <functional>
#include <string_view>

namespace erpf {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the process-wide warning sink (default: stderr). Returns the
/// previous one. Passing an empty function silences warnings.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace erpf
