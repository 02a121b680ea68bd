#pragma once

#include "rtrf/cfg.hpp"
#include "rtrf/cost_model.hpp"
#include "rtrf/error.hpp"
#include "rtrf/geometry.hpp"
#include "rtrf/listing.hpp"
#include "rtrf/recommender.hpp"
#include "rtrf/rf_sim.hpp"
#include "rtrf/sweep.hpp"
#include "rtrf/synthetic.hpp"
#include "rtrf/trace.hpp"
#include "rtrf/units.hpp"
