// compiles channels.hpp on its own
#include "chanent/channels.hpp"
