#pragma once

// Hidden variable recurrent fractal interpolation: construction, evaluation,
// perturbation error bounds, and box-counting dimension bounds for curves
// and surfaces.

#include "hvrfif/config.hpp"
#include "hvrfif/dimension.hpp"
#include "hvrfif/errors.hpp"
#include "hvrfif/evaluator.hpp"
#include "hvrfif/expr.hpp"
#include "hvrfif/matrix.hpp"
#include "hvrfif/model.hpp"
#include "hvrfif/perturbation.hpp"
#include "hvrfif/rifs.hpp"
#include "hvrfif/surface.hpp"
#include "hvrfif/util.hpp"
