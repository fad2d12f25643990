#pragma once

#include "ipersea/adversary.hpp"
#include "ipersea/analytic.hpp"
#include "ipersea/dht.hpp"
#include "ipersea/experiment.hpp"
#include "ipersea/graph.hpp"
#include "ipersea/idspace.hpp"
#include "ipersea/lookup.hpp"
#include "ipersea/rng.hpp"
#include "ipersea/sybil.hpp"
#include "ipersea/types.hpp"
#include "ipersea/world.hpp"
