#pragma once

#include <string>
#include <vector>

namespace sparsedom {

// Runs the command-line front end. Returns 0 on success or asserted pass,
// 2 when a verification check fails, 1 on usage or I/O errors.
int cli_run(const std::vector<std::string>& argv);

}  // namespace sparsedom
