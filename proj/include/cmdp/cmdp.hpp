#pragma once

// Finite-horizon constrained MDPs: exact evaluation and LP ground truth,
// regularized primal-dual / dual saddle-point schemes, optimistic online
// learning, and the experiment harness.

#include "cmdp/csv.hpp"
#include "cmdp/evaluate.hpp"
#include "cmdp/exact.hpp"
#include "cmdp/experiment.hpp"
#include "cmdp/generate.hpp"
#include "cmdp/grid.hpp"
#include "cmdp/learner.hpp"
#include "cmdp/ledger.hpp"
#include "cmdp/model.hpp"
#include "cmdp/model_io.hpp"
#include "cmdp/optimism.hpp"
#include "cmdp/plot.hpp"
#include "cmdp/rng.hpp"
#include "cmdp/sample.hpp"
#include "cmdp/schemes.hpp"
#include "cmdp/simplex.hpp"
