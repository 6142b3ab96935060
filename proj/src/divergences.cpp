// compiles divergences.hpp on its own
#include "chanent/divergences.hpp"
