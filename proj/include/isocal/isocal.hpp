#pragma once

#include "isocal/error.hpp"
#include "isocal/gridio.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/metrics.hpp"
#include "isocal/model_io.hpp"
#include "isocal/normal.hpp"
#include "isocal/predictive.hpp"
#include "isocal/recalibration.hpp"
#include "isocal/synth.hpp"
