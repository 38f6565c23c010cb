#pragma once

#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"
#include "waterline/conditions.hpp"
#include "waterline/solver_core.hpp"
#include "waterline/solver_box.hpp"
#include "waterline/solver_nested.hpp"
#include "waterline/solver_fair.hpp"
#include "waterline/oracle.hpp"
#include "waterline/scenario.hpp"
#include "waterline/io.hpp"
