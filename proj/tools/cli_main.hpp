#pragma once

#include <string>
#include <vector>

namespace pih {

// Runs one CLI invocation; args excludes the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace pih
