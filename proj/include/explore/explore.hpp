#pragma once

#include "explore/astar.hpp"
#include "explore/config.hpp"
#include "explore/errors.hpp"
#include "explore/floorplan.hpp"
#include "explore/frontier.hpp"
#include "explore/grid.hpp"
#include "explore/infogain.hpp"
#include "explore/metrics.hpp"
#include "explore/pgm.hpp"
#include "explore/planner.hpp"
#include "explore/predictor.hpp"
#include "explore/record.hpp"
#include "explore/experiment.hpp"
#include "explore/raywalk.hpp"
#include "explore/simworld.hpp"
