#pragma once

#include <string>

namespace riskcal {

// Shortest decimal text that parses back to the same double. Used for every
// CSV/JSON number we emit so reports are byte-stable.
std::string format_number(double value);

}  // namespace riskcal
