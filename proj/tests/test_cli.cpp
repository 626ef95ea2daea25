#include <catch2/catch_amalgamated.hpp>
#include "gwi/gwi.hpp"
