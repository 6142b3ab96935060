// compiles suites.hpp on its own
#include "chanent/suites.hpp"
