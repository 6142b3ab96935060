// compiles superchannels.hpp on its own
#include "chanent/superchannels.hpp"
