#pragma once

// Critical branching processes with immigration under regularly varying
// offspring/immigration tails: exact laws, pgf series numerics, path
// simulation, and precise-large-deviation validation.

#include "gwi/errors.hpp"
#include "gwi/estimate.hpp"
#include "gwi/models.hpp"
#include "gwi/numerics.hpp"
#include "gwi/predict.hpp"
#include "gwi/rng.hpp"
#include "gwi/series.hpp"
#include "gwi/simulate.hpp"
