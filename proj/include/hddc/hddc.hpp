#pragma once

// Umbrella header for the whole library.

#include "hddc/baselines.hpp"
#include "hddc/dimension.hpp"
#include "hddc/em.hpp"
#include "hddc/errors.hpp"
#include "hddc/io.hpp"
#include "hddc/linalg.hpp"
#include "hddc/metrics.hpp"
#include "hddc/model.hpp"
#include "hddc/parallel.hpp"
#include "hddc/presets.hpp"
#include "hddc/selection.hpp"
#include "hddc/synthgen.hpp"
