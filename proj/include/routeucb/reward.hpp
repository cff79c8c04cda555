#ifndef ROUTEUCB_REWARD_HPP
#define ROUTEUCB_REWARD_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "routeucb/dataset.hpp"

namespace routeucb {

struct RewardParams {
    // Strength of the cost penalty. The reference experiments never disclose
    // their value; 1.0 is this project's documented default.
    double lambda_cost = 1.0;
};

// r = q * exp(-lambda * c~). In [0, q] for lambda >= 0.
inline double utility_reward(double q, double c_norm, const RewardParams& params) {
    return q * std::exp(-params.lambda_cost * c_norm);
}

// Utility reward of every action for one sample. Full-information: for use by
// oracles, metrics, and supervised baselines only, never by a policy's
// decision path, which sees a RoutingContext and cannot reach these fields.
inline Vec reward_table(const Sample& s, double cmax, const RewardParams& params,
                        std::uint64_t* clamp_counter = nullptr) {
    Vec r(s.quality.size());
    for (std::size_t a = 0; a < s.quality.size(); ++a)
        r[a] = utility_reward(s.quality[a], normalize_cost(s.cost[a], cmax, clamp_counter), params);
    return r;
}

// The replay environment's feedback window. Policies never hold a Sample;
// everything they learn from arrives through observe(), one action per query.
// Access counters exist so tests can prove the partial-feedback contract:
// a full run must show exactly one observe per decision and zero table reads
// from anywhere inside the decision path.
class RewardOracle {
public:
    struct Feedback {
        double quality = 0.0;
        double raw_cost = 0.0;
        double cost_norm = 0.0;
        double reward = 0.0;
    };

    RewardOracle(const Dataset& ds, RewardParams params) : ds_(&ds), params_(params) {}

    // Reveals the chosen action's outcome only.
    Feedback observe(std::size_t sample_index, int action) const {
        const Sample& s = sample_at(sample_index);
        if (action < 0 || action >= static_cast<int>(s.quality.size()))
            throw std::out_of_range("RewardOracle::observe: action out of range");
        ++observe_count_;
        Feedback fb;
        fb.quality = s.quality[static_cast<std::size_t>(action)];
        fb.raw_cost = s.cost[static_cast<std::size_t>(action)];
        fb.cost_norm = normalize_cost(fb.raw_cost, ds_->header.cmax, &clamp_count_);
        fb.reward = utility_reward(fb.quality, fb.cost_norm, params_);
        return fb;
    }

    // Full-information window (counted): baselines' supervised fitting and
    // test oracles only.
    Vec table(std::size_t sample_index) const {
        const Sample& s = sample_at(sample_index);
        ++table_count_;
        return reward_table(s, ds_->header.cmax, params_, &clamp_count_);
    }

    std::uint64_t observe_count() const { return observe_count_; }
    std::uint64_t table_count() const { return table_count_; }
    std::uint64_t clamp_count() const { return clamp_count_; }
    const RewardParams& params() const { return params_; }
    double cmax() const { return ds_->header.cmax; }

private:
    const Sample& sample_at(std::size_t i) const {
        if (i >= ds_->samples.size()) throw std::out_of_range("RewardOracle: sample index out of range");
        return ds_->samples[i];
    }

    const Dataset* ds_;
    RewardParams params_;
    mutable std::uint64_t observe_count_ = 0;
    mutable std::uint64_t table_count_ = 0;
    mutable std::uint64_t clamp_count_ = 0;
};

} // namespace routeucb

#endif
