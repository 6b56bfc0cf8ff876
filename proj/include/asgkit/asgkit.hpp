// Umbrella header.
#pragma once

#include "asgkit/asymptotics.hpp"
#include "asgkit/chain.hpp"
#include "asgkit/core.hpp"
#include "asgkit/diffusion.hpp"
#include "asgkit/dirichlet.hpp"
#include "asgkit/io.hpp"
#include "asgkit/pim.hpp"
#include "asgkit/recursion.hpp"
#include "asgkit/rng.hpp"
