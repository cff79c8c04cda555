#pragma once
// Replay buffer record shared by the training loop and the protocol runner.

#include "routeucb/dataset.hpp"

namespace routeucb {

// One observed interaction. Only the chosen action's reward is ever stored;
// gate_label is fixed at decision time so later retraining sees the same
// targets (see protocol.hpp).
struct ReplayRecord {
    RoutingContext context;
    int action = 0;
    double reward = 0.0;
    int gate_label = 0; // 1 when the pre-decision estimate was overconfident
    int slice_index = 0;
};

} // namespace routeucb
