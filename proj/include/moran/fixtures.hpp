#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "moran/system.hpp"

namespace moran {

// Names of the configurations bundled with the library.
std::vector<std::string> fixture_names();

// The configuration document for a bundled fixture. Unknown names raise
// InvalidArgument.
std::string fixture_document(std::string_view name);

// Parsed fixture. Standing assumptions are not enforced here so that the
// deliberately degenerate fixtures can still be loaded and validated.
SystemSpec fixture(std::string_view name);

}  // namespace moran
