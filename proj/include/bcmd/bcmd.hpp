#pragma once

// Umbrella header: event-driven hard-sphere dynamics, backward-cluster
// analysis and the kinetic-theory reference models.

#include "bcmd/clusters.hpp"
#include "bcmd/collision.hpp"
#include "bcmd/collision_log.hpp"
#include "bcmd/config.hpp"
#include "bcmd/engine.hpp"
#include "bcmd/ensemble.hpp"
#include "bcmd/init.hpp"
#include "bcmd/kinetics.hpp"
#include "bcmd/quadrature.hpp"
#include "bcmd/rng.hpp"
#include "bcmd/vec3.hpp"
