#pragma once
// Convenience include: the whole routing engine.

#include "routeucb/baselines.hpp"
#include "routeucb/dataset.hpp"
#include "routeucb/linalg.hpp"
#include "routeucb/metrics.hpp"
#include "routeucb/protocol.hpp"
#include "routeucb/replay.hpp"
#include "routeucb/reward.hpp"
#include "routeucb/rng.hpp"
#include "routeucb/run_config.hpp"
#include "routeucb/synthetic.hpp"
#include "routeucb/textio.hpp"
#include "routeucb/ucb_policy.hpp"
#include "routeucb/utility_net.hpp"
