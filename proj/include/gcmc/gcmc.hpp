#pragma once

// Everything except the CLI and JSON layers.

#include "gcmc/distribution.hpp"
#include "gcmc/error.hpp"
#include "gcmc/graph.hpp"
#include "gcmc/kernel.hpp"
#include "gcmc/matrix.hpp"
#include "gcmc/numeric.hpp"
#include "gcmc/planner.hpp"
#include "gcmc/product.hpp"
#include "gcmc/rng.hpp"
#include "gcmc/schedule.hpp"
#include "gcmc/simulator.hpp"
