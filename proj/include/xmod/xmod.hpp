#pragma once

// Umbrella header for the whole library.

#include "xmod/action.hpp"
#include "xmod/crossed_module.hpp"
#include "xmod/crossed_product.hpp"
#include "xmod/error.hpp"
#include "xmod/group.hpp"
#include "xmod/groupoid.hpp"
#include "xmod/groupoid_symmetry.hpp"
#include "xmod/linalg.hpp"
#include "xmod/morita.hpp"
#include "xmod/scenario.hpp"
#include "xmod/star_algebra.hpp"
