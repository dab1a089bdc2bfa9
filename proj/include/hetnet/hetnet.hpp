#pragma once

#include "hetnet/assign_opt.hpp"
#include "hetnet/assignment.hpp"
#include "hetnet/experiment.hpp"
#include "hetnet/games.hpp"
#include "hetnet/joint_alloc.hpp"
#include "hetnet/matrix.hpp"
#include "hetnet/model.hpp"
#include "hetnet/scenario_json.hpp"
#include "hetnet/stats.hpp"
#include "hetnet/verify.hpp"
