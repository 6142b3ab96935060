// compiles random.hpp on its own
#include "chanent/random.hpp"
