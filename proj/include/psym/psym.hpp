#pragma once

#include "psym/activations.hpp"
#include "psym/ad.hpp"
#include "psym/errors.hpp"
#include "psym/integrators.hpp"
#include "psym/io.hpp"
#include "psym/linalg.hpp"
#include "psym/metrics.hpp"
#include "psym/network.hpp"
#include "psym/rng.hpp"
#include "psym/systems.hpp"
#include "psym/training.hpp"
