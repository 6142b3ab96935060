// compiles linalg.hpp on its own
#include "chanent/linalg.hpp"
