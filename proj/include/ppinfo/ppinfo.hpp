#pragma once

// Umbrella header: unit-checked density, information, and estimation toolkit
// for finite point processes on a bounded window.

#include "ppinfo/rational.hpp"
#include "ppinfo/units.hpp"
#include "ppinfo/grid.hpp"
#include "ppinfo/model.hpp"
#include "ppinfo/measure.hpp"
#include "ppinfo/pgfl.hpp"
#include "ppinfo/info.hpp"
#include "ppinfo/estimator.hpp"
