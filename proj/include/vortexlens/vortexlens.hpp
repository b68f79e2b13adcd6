#pragma once

#include "vortexlens/constants.hpp"
#include "vortexlens/errors.hpp"
#include "vortexlens/fields.hpp"
#include "vortexlens/lensing.hpp"
#include "vortexlens/modes.hpp"
#include "vortexlens/observables.hpp"
#include "vortexlens/ode.hpp"
#include "vortexlens/quadrature.hpp"
#include "vortexlens/spline.hpp"
#include "vortexlens/splitting.hpp"
