#pragma once

#include "nonherm/core.hpp"
#include "nonherm/model.hpp"
#include "nonherm/spectral.hpp"
#include "nonherm/geometry.hpp"
#include "nonherm/propagator.hpp"
#include "nonherm/tracking.hpp"
#include "nonherm/scenarios.hpp"
#include "nonherm/config.hpp"
#include "nonherm/output.hpp"
#include "nonherm/checks.hpp"
