// compiles recovery.hpp on its own
#include "chanent/recovery.hpp"
