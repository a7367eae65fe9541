#pragma once

// Umbrella header.

#include "couplings.hpp"
#include "drivers.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "smallmat.hpp"
#include "spaces.hpp"
#include "suites.hpp"
#include "verify.hpp"
