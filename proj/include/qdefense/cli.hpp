#pragma once

#include <string>
#include <vector>

namespace qdefense::cli {

// Entry point behind the qdefense binary. Returns 0 on success, nonzero on
// validation or numerical failure; partial output files are removed when a
// run fails.
int run(int argc, const char* const* argv);

// Same, with arguments in natural order and no program name (test surface).
int run(const std::vector<std::string>& args);

}  // namespace qdefense::cli
