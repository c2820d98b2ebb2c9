#pragma once

// Umbrella header for the debt-ratio control toolkit.

#include "common.hpp"
#include "hjb.hpp"
#include "io.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "reduction.hpp"
#include "rng.hpp"
#include "sde.hpp"
#include "serialize.hpp"
#include "smoothing.hpp"
