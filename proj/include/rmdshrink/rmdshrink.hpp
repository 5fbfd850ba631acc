#pragma once

#include "rmdshrink/common.hpp"
#include "rmdshrink/special.hpp"
#include "rmdshrink/primitives.hpp"
#include "rmdshrink/location.hpp"
#include "rmdshrink/scatter.hpp"
#include "rmdshrink/detector.hpp"
#include "rmdshrink/simulation.hpp"
#include "rmdshrink/depth.hpp"
