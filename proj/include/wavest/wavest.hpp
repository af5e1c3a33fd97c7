#pragma once

// Umbrella header.

#include "wavest/errors.hpp"
#include "wavest/mesh.hpp"
#include "wavest/quadrature.hpp"
#include "wavest/time_calculus.hpp"
#include "wavest/linalg.hpp"
#include "wavest/lagrange_space.hpp"
#include "wavest/spatial_fem.hpp"
#include "wavest/problem.hpp"
#include "wavest/spacetime_solver.hpp"
#include "wavest/postprocess.hpp"
#include "wavest/aposteriori.hpp"
#include "wavest/experiment.hpp"
