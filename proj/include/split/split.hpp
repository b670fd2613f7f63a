#pragma once

#include "split/core.hpp"
#include "split/decompose.hpp"
#include "split/graph.hpp"
#include "split/instances.hpp"
#include "split/json_io.hpp"
#include "split/metrics.hpp"
#include "split/partition.hpp"
#include "split/rng.hpp"
#include "split/solver.hpp"
#include "split/subsolve.hpp"
