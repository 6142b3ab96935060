// compiles optimize.hpp on its own
#include "chanent/optimize.hpp"
