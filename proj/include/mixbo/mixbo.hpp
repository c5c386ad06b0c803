#pragma once

#include "mixbo/acquisition.hpp"
#include "mixbo/benchmarks.hpp"
#include "mixbo/core.hpp"
#include "mixbo/doe.hpp"
#include "mixbo/forest.hpp"
#include "mixbo/io.hpp"
#include "mixbo/lvgp.hpp"
#include "mixbo/minima.hpp"
#include "mixbo/optimize.hpp"
#include "mixbo/random.hpp"
#include "mixbo/results.hpp"
#include "mixbo/runner.hpp"
