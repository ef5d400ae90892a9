#pragma once

#include "mhd/fem/assembly.hpp"
#include "mhd/fem/dirichlet.hpp"
#include "mhd/fem/quadrature.hpp"
#include "mhd/fem/spaces.hpp"
#include "mhd/mesh.hpp"
