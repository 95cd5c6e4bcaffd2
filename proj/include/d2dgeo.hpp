#pragma once

#include "d2dgeo/curve.hpp"
#include "d2dgeo/errors.hpp"
#include "d2dgeo/fading.hpp"
#include "d2dgeo/interference.hpp"
#include "d2dgeo/io.hpp"
#include "d2dgeo/mcsim.hpp"
#include "d2dgeo/metrics.hpp"
#include "d2dgeo/network.hpp"
#include "d2dgeo/random.hpp"
#include "d2dgeo/sinr_functional.hpp"
#include "d2dgeo/specfun.hpp"
#include "d2dgeo/validation.hpp"
