#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace calolab {

// Runs the calolab command line (args excludes the program name).
// Returns 0 on success, 1 on invalid input (nothing written), 2 on numerical
// failure or failing acceptance criteria.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace calolab
