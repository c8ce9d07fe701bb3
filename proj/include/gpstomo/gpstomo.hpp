#ifndef GPSTOMO_GPSTOMO_HPP
#define GPSTOMO_GPSTOMO_HPP

#include "config.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "field.hpp"
#include "forward.hpp"
#include "geometry.hpp"
#include "linalg.hpp"
#include "objective.hpp"
#include "phantom.hpp"
#include "solvers/cgne.hpp"
#include "solvers/lbfgs.hpp"
#include "solvers/reconstruct.hpp"
#include "solvers/termination.hpp"
#include "tv.hpp"

#endif // GPSTOMO_GPSTOMO_HPP
