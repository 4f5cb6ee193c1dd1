#pragma once

#include "morrey/ball_integration.hpp"
#include "morrey/config.hpp"
#include "morrey/constants_engine.hpp"
#include "morrey/core_model.hpp"
#include "morrey/error.hpp"
#include "morrey/norm_engine.hpp"
#include "morrey/parallel.hpp"
#include "morrey/report.hpp"
#include "morrey/special_functions.hpp"
