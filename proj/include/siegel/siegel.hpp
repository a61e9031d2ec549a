#pragma once

#include "analytic_map.hpp"
#include "beltrami.hpp"
#include "constants.hpp"
#include "crescent.hpp"
#include "io.hpp"
#include "polar_field.hpp"
#include "renorm.hpp"
#include "spectrum.hpp"
#include "transforms.hpp"
