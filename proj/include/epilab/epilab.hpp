// Umbrella header.
#pragma once

#include "epilab/comparison.hpp"
#include "epilab/core.hpp"
#include "epilab/discretization.hpp"
#include "epilab/estimates.hpp"
#include "epilab/experiment.hpp"
#include "epilab/geometry.hpp"
#include "epilab/io.hpp"
#include "epilab/moving_plane.hpp"
#include "epilab/nonlinearity.hpp"
#include "epilab/profiles.hpp"
#include "epilab/solver.hpp"
