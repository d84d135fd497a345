#pragma once

#include <string>
#include <vector>

namespace skilllab {

// Entry point of the `skilllab` tool. Returns the process exit code.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace skilllab
