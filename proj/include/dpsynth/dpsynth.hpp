#pragma once

#include "dpsynth/bdd.hpp"
#include "dpsynth/bdd_io.hpp"
#include "dpsynth/cnf.hpp"
#include "dpsynth/pipeline.hpp"
#include "dpsynth/planner.hpp"
#include "dpsynth/realizability.hpp"
#include "dpsynth/synthesis.hpp"
#include "dpsynth/verify.hpp"
