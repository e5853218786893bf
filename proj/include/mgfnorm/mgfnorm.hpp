#pragma once

// Umbrella header.

#include "mgfnorm/alternatives.hpp"
#include "mgfnorm/common.hpp"
#include "mgfnorm/garch.hpp"
#include "mgfnorm/io.hpp"
#include "mgfnorm/linalg.hpp"
#include "mgfnorm/montecarlo.hpp"
#include "mgfnorm/optimizer.hpp"
#include "mgfnorm/parallel.hpp"
#include "mgfnorm/quadrature.hpp"
#include "mgfnorm/rng.hpp"
#include "mgfnorm/statistic.hpp"
