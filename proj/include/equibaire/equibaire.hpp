#pragma once

#include "equibaire/approximation.hpp"
#include "equibaire/collapse.hpp"
#include "equibaire/error.hpp"
#include "equibaire/flow.hpp"
#include "equibaire/gauge.hpp"
#include "equibaire/moebius.hpp"
#include "equibaire/sphere.hpp"
#include "equibaire/verdict.hpp"
