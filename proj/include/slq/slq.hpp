#pragma once

#include "slq/core.hpp"
#include "slq/random.hpp"
#include "slq/operators.hpp"
#include "slq/matern.hpp"
#include "slq/functions.hpp"
#include "slq/tridiag.hpp"
#include "slq/lanczos.hpp"
#include "slq/elliptic.hpp"
#include "slq/rational.hpp"
#include "slq/error_monitor.hpp"
#include "slq/lookback_bounds.hpp"
#include "slq/trace_estimator.hpp"
#include "slq/oracles.hpp"
#include "slq/experiment.hpp"
