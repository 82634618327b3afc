#pragma once

#include "hnmx/cm_check.hpp"
#include "hnmx/convergence.hpp"
#include "hnmx/cq_weights.hpp"
#include "hnmx/errors.hpp"
#include "hnmx/harness.hpp"
#include "hnmx/hn_stepper.hpp"
#include "hnmx/maxwell_fem.hpp"
#include "hnmx/series.hpp"
#include "hnmx/special_fn.hpp"
