// compiles bounds.hpp on its own
#include "chanent/bounds.hpp"
