// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header for the movable-antenna near-field ISAC library.

#include "maisac/ao.hpp"
#include "maisac/apm.hpp"
#include "maisac/beampattern.hpp"
#include "maisac/channels.hpp"
#include "maisac/error.hpp"
#include "maisac/metrics.hpp"
#include "maisac/rp_search.hpp"
#include "maisac/sca.hpp"
#include "maisac/scenario.hpp"
#include "maisac/surrogate.hpp"
#include "maisac/version.hpp"
