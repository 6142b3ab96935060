// compiles io.hpp on its own
#include "chanent/io.hpp"
