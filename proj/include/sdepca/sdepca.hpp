#pragma once

#include "sdepca/brownian.hpp"
#include "sdepca/errors.hpp"
#include "sdepca/integrators.hpp"
#include "sdepca/io.hpp"
#include "sdepca/linear_analytic.hpp"
#include "sdepca/model.hpp"
#include "sdepca/montecarlo.hpp"
#include "sdepca/parallel.hpp"
#include "sdepca/problems.hpp"
#include "sdepca/rng.hpp"
#include "sdepca/types.hpp"
