#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qdiff {

/// Runs one command line (without the program name). Records go to `out` as
/// JSON lines and are appended to the results file; diagnostics go to `err`
/// as single-line JSON. Returns 0 on success, 1 when a check fails, 2 on a
/// usage or configuration error, 3 when a computation exceeds its size cap.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdiff
