#pragma once

#include "magnetodisk/bifurcation.hpp"
#include "magnetodisk/eigen.hpp"
#include "magnetodisk/fields.hpp"
#include "magnetodisk/grid.hpp"
#include "magnetodisk/operators.hpp"
#include "magnetodisk/solver.hpp"
#include "magnetodisk/tridiagonal.hpp"
#include "magnetodisk/verification.hpp"
#include "magnetodisk/version.hpp"
