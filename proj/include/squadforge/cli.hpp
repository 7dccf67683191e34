#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace squadforge {

// Exit codes: 0 success, 1 validation/config/runtime error, 2 usage error.
// Errors are reported on `err` as a single line "error: <kind>: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace squadforge
