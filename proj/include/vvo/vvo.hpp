#pragma once

#include "vvo/agents.hpp"
#include "vvo/devices.hpp"
#include "vvo/env.hpp"
#include "vvo/eval.hpp"
#include "vvo/feeder_json.hpp"
#include "vvo/linalg3.hpp"
#include "vvo/mlp.hpp"
#include "vvo/network.hpp"
#include "vvo/phase.hpp"
#include "vvo/powerflow.hpp"
#include "vvo/replay.hpp"
#include "vvo/rng.hpp"
