#pragma once

#include <string>

namespace polaron {

/// Result of one JSON command; status follows ErrorKind (0 success, 3 flagged violation).
struct CommandResult {
  int status = 0;
  std::string response;
};

/// Dispatches a named command with a JSON request body. Throws polaron::Error on failure.
CommandResult run_command(const std::string& command, const std::string& request);

}  // namespace polaron
