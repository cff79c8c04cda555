#pragma once
// Reference policies: uniform random, min-cost, max-quality, and a frozen
// binary strong/weak router with a logistic classifier over the text
// embedding. The binary router stands in for an offline-pretrained router; it
// trains once on its warm-start slice and never updates again.

#include "routeucb/dataset.hpp"
#include "routeucb/reward.hpp"
#include "routeucb/rng.hpp"
#include "routeucb/utility_net.hpp" // net::sigmoid

#include <cmath>
#include <stdexcept>
#include <vector>

namespace routeucb {

inline int random_policy(int num_actions, Rng& rng) {
    if (num_actions < 1) throw std::invalid_argument("random_policy: need at least one action");
    return rng.uniform_int(num_actions);
}

// Ties break to the lowest action index, here and in maxquality_policy.
inline int mincost_policy(const Sample& s) {
    int best = 0;
    for (std::size_t a = 1; a < s.cost.size(); ++a)
        if (s.cost[a] < s.cost[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

inline int maxquality_policy(const Sample& s) {
    int best = 0;
    for (std::size_t a = 1; a < s.quality.size(); ++a)
        if (s.quality[a] > s.quality[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

struct BinaryRouterParams {
    int strong_action = 0;
    int weak_action = 0;
    Vec weights;         // E classifier weights
    double bias = 0.0;
    double threshold = 0.5;
};

// Strong/weak = highest/lowest average utility reward over the training
// slice. The classifier is a logistic fit on embeddings, label 1 when the
// strong action's reward beats the weak one's for that sample; plain
// full-batch gradient descent, deterministic, no randomness involved.
inline BinaryRouterParams fit_binary_router(const std::vector<Sample>& slice, double cmax,
                                            const RewardParams& rp) {
    if (slice.empty()) throw std::invalid_argument("fit_binary_router: empty training slice");
    const int num_k = static_cast<int>(slice.front().quality.size());
    const int dim = static_cast<int>(slice.front().embedding.size());

    Vec arm_sum(static_cast<std::size_t>(num_k), 0.0);
    std::vector<Vec> rewards;
    rewards.reserve(slice.size());
    for (const Sample& s : slice) {
        rewards.push_back(reward_table(s, cmax, rp));
        for (int a = 0; a < num_k; ++a) arm_sum[static_cast<std::size_t>(a)] += rewards.back()[static_cast<std::size_t>(a)];
    }
    BinaryRouterParams p;
    for (int a = 1; a < num_k; ++a) {
        if (arm_sum[static_cast<std::size_t>(a)] > arm_sum[static_cast<std::size_t>(p.strong_action)]) p.strong_action = a;
        if (arm_sum[static_cast<std::size_t>(a)] < arm_sum[static_cast<std::size_t>(p.weak_action)]) p.weak_action = a;
    }
    if (p.strong_action == p.weak_action)
        throw std::runtime_error("fit_binary_router: degenerate slice, strong == weak");

    std::vector<double> label(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i)
        label[i] = rewards[i][static_cast<std::size_t>(p.strong_action)] >=
                           rewards[i][static_cast<std::size_t>(p.weak_action)]
                       ? 1.0
                       : 0.0;

    // mean BCE + small L2; lr is safe for unit-scale embeddings
    p.weights.assign(static_cast<std::size_t>(dim), 0.0);
    const double lr = 0.5;
    const double l2 = 1e-4;
    const int iters = 500;
    const double inv_n = 1.0 / static_cast<double>(slice.size());
    Vec gw(static_cast<std::size_t>(dim));
    for (int it = 0; it < iters; ++it) {
        std::fill(gw.begin(), gw.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < slice.size(); ++i) {
            const double z = dot(p.weights, slice[i].embedding) + p.bias;
            const double err = (net::sigmoid(z) - label[i]) * inv_n;
            for (int e = 0; e < dim; ++e) gw[static_cast<std::size_t>(e)] += err * slice[i].embedding[static_cast<std::size_t>(e)];
            gb += err;
        }
        for (int e = 0; e < dim; ++e)
            p.weights[static_cast<std::size_t>(e)] -= lr * (gw[static_cast<std::size_t>(e)] + l2 * p.weights[static_cast<std::size_t>(e)]);
        p.bias -= lr * gb;
    }
    return p;
}

inline int binary_route(const BinaryRouterParams& p, const RoutingContext& ctx) {
    if (ctx.embedding.size() != p.weights.size())
        throw std::invalid_argument("binary_route: embedding length mismatch");
    const double z = dot(p.weights, ctx.embedding) + p.bias;
    return net::sigmoid(z) >= p.threshold ? p.strong_action : p.weak_action;
}

} // namespace routeucb
