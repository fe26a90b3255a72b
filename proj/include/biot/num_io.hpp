#pragma once

#include <string>

namespace biot {

// Shortest decimal rendering that round-trips to the same double.
std::string format_double(double v);

}  // namespace biot
