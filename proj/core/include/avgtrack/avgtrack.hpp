#pragma once

#include "avgtrack/criteria.hpp"
#include "avgtrack/csv.hpp"
#include "avgtrack/errors.hpp"
#include "avgtrack/harness.hpp"
#include "avgtrack/matnum.hpp"
#include "avgtrack/mpc.hpp"
#include "avgtrack/plant.hpp"
#include "avgtrack/qp.hpp"
#include "avgtrack/riccati.hpp"
#include "avgtrack/scalar_dp.hpp"
#include "avgtrack/trajectory.hpp"
