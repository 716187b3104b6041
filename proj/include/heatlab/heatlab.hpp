#pragma once

#include "grid.hpp"
#include "norms.hpp"
#include "stencils.hpp"
#include "io.hpp"
#include "morrey.hpp"
#include "bump.hpp"
#include "kernels.hpp"
#include "pde.hpp"
#include "rng.hpp"
#include "sde.hpp"
#include "counterexamples.hpp"
