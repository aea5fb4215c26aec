#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mlpalg/errors.hpp"

namespace mlpalg::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kValidation = 2;
inline constexpr int kNumeric = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Runs one command. `args` excludes the program name. Standard output is
// written only when the command succeeds; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mlpalg::cli
