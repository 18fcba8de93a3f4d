#pragma once

#include <functional>
#include <string>

namespace cdmca {

using WarningHandler = std::function<void(const std::string&)>;

// Default handler prints "warning: <msg>" to stderr. Returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace cdmca
