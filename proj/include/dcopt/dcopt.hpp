#pragma once

#include "dcopt/bench.hpp"
#include "dcopt/config.hpp"
#include "dcopt/csv.hpp"
#include "dcopt/dc_problem.hpp"
#include "dcopt/dense.hpp"
#include "dcopt/diagnostics.hpp"
#include "dcopt/losses.hpp"
#include "dcopt/outlier_model.hpp"
#include "dcopt/regularizers.hpp"
#include "dcopt/rng.hpp"
#include "dcopt/solvers.hpp"
#include "dcopt/types.hpp"
