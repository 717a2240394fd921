#pragma once

// Umbrella header for the spps library.

#include "spps/engine.hpp"
#include "spps/errors.hpp"
#include "spps/io.hpp"
#include "spps/kinematics.hpp"
#include "spps/numerics.hpp"
#include "spps/scenario.hpp"
#include "spps/svg.hpp"
#include "spps/tomography.hpp"
#include "spps/units.hpp"
#include "spps/version.hpp"
#include "spps/wigner.hpp"
