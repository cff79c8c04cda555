#pragma once
// Simulated-online protocol over an ordered sample stream cut into slices.
// Within a slice: decide, observe only the chosen action's feedback, append a
// replay record, rank-1 update the covariance. At each slice end the learning
// policy retrains on the whole buffer and rebuilds the covariance under the
// new parameters. Baselines ride the same stream and record-keeping but skip
// every learning step. Everything is deterministic given the seed.

#include "routeucb/baselines.hpp"
#include "routeucb/dataset.hpp"
#include "routeucb/metrics.hpp"
#include "routeucb/replay.hpp"
#include "routeucb/reward.hpp"
#include "routeucb/rng.hpp"
#include "routeucb/ucb_policy.hpp"
#include "routeucb/utility_net.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace routeucb {

enum class PolicyKind { neural_ucb, random, min_cost, max_quality, binary_router };

inline const char* policy_kind_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::neural_ucb: return "neural_ucb";
        case PolicyKind::random: return "random";
        case PolicyKind::min_cost: return "min_cost";
        case PolicyKind::max_quality: return "max_quality";
        case PolicyKind::binary_router: return "binary_router";
    }
    return "?";
}

inline PolicyKind policy_kind_from_name(const std::string& name) {
    for (PolicyKind k : {PolicyKind::neural_ucb, PolicyKind::random, PolicyKind::min_cost,
                         PolicyKind::max_quality, PolicyKind::binary_router})
        if (name == policy_kind_name(k)) return k;
    throw std::invalid_argument("unknown policy kind '" + name +
                                "' (expected neural_ucb|random|min_cost|max_quality|binary_router)");
}

enum class Warmstart { uniform_random_first_slice, none };

struct ProtocolConfig {
    int num_slices = 20;
    int replay_epochs = 5;
    std::uint64_t seed = 1;
    Warmstart warmstart = Warmstart::uniform_random_first_slice;
};

struct TrainConfig {
    double lr = 1e-3;
    int batch_size = 256;
    double huber_delta = 1.0;
    double gate_weight = 1.0;
    // y_gate = 1 when the pre-decision mu overestimates the realized reward
    // by more than this margin.
    double gate_margin = 0.05;
};

struct ProtocolStats {
    std::int64_t trains = 0;
    std::int64_t rebuilds = 0;
};

// In-order partition with slice sizes differing by at most one (the leading
// slices take the remainder).
inline std::vector<std::pair<int, int>> slice_bounds(int n, int num_slices) {
    if (num_slices < 1) throw std::invalid_argument("slice_bounds: need at least one slice");
    if (n < num_slices)
        throw std::invalid_argument("slice_bounds: " + std::to_string(num_slices) +
                                    " slices need at least that many samples, got " + std::to_string(n));
    std::vector<std::pair<int, int>> bounds;
    bounds.reserve(static_cast<std::size_t>(num_slices));
    const int base = n / num_slices;
    const int rem = n % num_slices;
    int lo = 0;
    for (int t = 0; t < num_slices; ++t) {
        const int hi = lo + base + (t < rem ? 1 : 0);
        bounds.emplace_back(lo, hi);
        lo = hi;
    }
    return bounds;
}

class ProtocolRunner {
public:
    ProtocolRunner(const Dataset& ds, PolicyKind kind, const ProtocolConfig& pc,
                   const RewardParams& rp, const UcbConfig& uc = UcbConfig{},
                   const TrainConfig& tc = TrainConfig{})
        : ds_(&ds),
          kind_(kind),
          pc_(pc),
          tc_(tc),
          oracle_(ds, rp),
          bounds_(slice_bounds(static_cast<int>(ds.samples.size()), pc.num_slices)),
          decide_rng_(mix_seed(pc.seed, 0xDEC1DE)) {
        if (pc.replay_epochs < 0) throw std::invalid_argument("protocol: replay_epochs must be >= 0");
        if (kind_ == PolicyKind::neural_ucb) {
            params_ = init_params(ds.header.embed_dim, ds.header.num_domains, ds.header.num_actions,
                                  mix_seed(pc.seed, 0x1A17));
            opt_ = make_optimizer(params_, tc.lr);
            ucb_ = make_ucb_state(uc);
        }
    }

    // Drop-in learner state (e.g. from a checkpoint) plus the replay buffer of
    // every earlier slice; continues the protocol at `next_slice` (0-based).
    // The covariance is rebuilt from the buffer under the restored parameters,
    // which is exactly its state at a slice boundary. Metrics restart at the
    // resumed slice; the cumulative reward column stays correct because it is
    // reconstructed from the buffer.
    void restore_learner(const UtilityNetParams& params, const OptimizerState& opt,
                         std::vector<ReplayRecord> buffer, int next_slice) {
        if (kind_ != PolicyKind::neural_ucb)
            throw std::logic_error("restore_learner: only the learning policy has state to restore");
        if (next_slice < 0 || next_slice > static_cast<int>(bounds_.size()))
            throw std::invalid_argument("restore_learner: slice index out of range");
        if (next_slice > 0 && static_cast<int>(buffer.size()) != bounds_[static_cast<std::size_t>(next_slice - 1)].second)
            throw std::invalid_argument("restore_learner: buffer length does not match the slice boundary");
        params_ = params;
        opt_ = opt;
        buffer_ = std::move(buffer);
        chosen_.clear();
        for (const ReplayRecord& r : buffer_) chosen_.push_back(r.action);
        cum_reward_ = 0.0;
        for (const ReplayRecord& r : buffer_) cum_reward_ += r.reward;
        rebuild(ucb_, params_, buffer_);
        next_slice_ = next_slice;
        metrics_.clear();
    }

    bool done() const { return next_slice_ >= static_cast<int>(bounds_.size()); }

    void run_slice() {
        if (done()) throw std::logic_error("run_slice: protocol already finished");
        const int t = next_slice_;
        const auto [lo, hi] = bounds_[static_cast<std::size_t>(t)];
        const int num_k = ds_->header.num_actions;
        const bool warm = kind_ == PolicyKind::neural_ucb && t == 0 &&
                          pc_.warmstart == Warmstart::uniform_random_first_slice;
        if (kind_ == PolicyKind::binary_router && t == 0) {
            const std::vector<Sample> head(ds_->samples.begin() + lo, ds_->samples.begin() + hi);
            binary_ = fit_binary_router(head, ds_->header.cmax, oracle_.params());
        }

        int gate_open = 0;
        for (int i = lo; i < hi; ++i) {
            const Sample& s = ds_->samples[static_cast<std::size_t>(i)];
            const RoutingContext ctx = context_of(s);
            int a = 0;
            double mu_pred = 0.0;
            bool have_mu = false;
            Vec g;
            switch (kind_) {
                case PolicyKind::neural_ucb: {
                    if (warm) {
                        a = random_policy(num_k, decide_rng_);
                        const ForwardTrace tr = forward(params_, ctx, a);
                        mu_pred = tr.mu;
                        if (tr.gate_prob >= ucb_.tau_g) ++gate_open;
                        g = augment_feature(tr.h_last);
                    } else {
                        const Decision d = decide(params_, ucb_, ctx);
                        a = d.chosen_action;
                        mu_pred = d.mu_scores[static_cast<std::size_t>(a)];
                        if (d.used_ucb) ++gate_open;
                        g = augment_feature(forward(params_, ctx, a).h_last);
                    }
                    have_mu = true;
                    break;
                }
                case PolicyKind::random:
                    a = random_policy(num_k, decide_rng_);
                    break;
                case PolicyKind::min_cost:
                    a = mincost_policy(s);
                    break;
                case PolicyKind::max_quality:
                    a = maxquality_policy(s);
                    break;
                case PolicyKind::binary_router:
                    a = binary_route(binary_, ctx);
                    break;
            }
            const RewardOracle::Feedback fb = oracle_.observe(static_cast<std::size_t>(i), a);
            ReplayRecord rec;
            rec.context = ctx;
            rec.action = a;
            rec.reward = fb.reward;
            rec.gate_label = have_mu && (mu_pred - fb.reward > tc_.gate_margin) ? 1 : 0;
            rec.slice_index = t + 1;
            buffer_.push_back(std::move(rec));
            chosen_.push_back(a);
            if (kind_ == PolicyKind::neural_ucb) rank1_update(ucb_, g);
        }

        const std::vector<ReplayRecord> slice_records(buffer_.begin() + lo, buffer_.begin() + hi);
        const double rate = kind_ == PolicyKind::neural_ucb
                                ? static_cast<double>(gate_open) / static_cast<double>(hi - lo)
                                : 0.0;
        metrics_.push_back(compute_slice_metrics(slice_records, ds_->samples,
                                                 static_cast<std::size_t>(lo), num_k,
                                                 ds_->header.cmax, oracle_.params(), t + 1,
                                                 cum_reward_, rate));
        cum_reward_ = metrics_.back().cum_reward;

        if (kind_ == PolicyKind::neural_ucb && pc_.replay_epochs > 0) {
            train_epochs(params_, opt_, buffer_, pc_.replay_epochs, tc_.batch_size,
                         mix_seed(pc_.seed, 0x7200 + static_cast<std::uint64_t>(t)),
                         tc_.huber_delta, tc_.gate_weight);
            ++stats_.trains;
            rebuild(ucb_, params_, buffer_);
            ++stats_.rebuilds;
        }
        ++next_slice_;
    }

    void run_all() {
        while (!done()) run_slice();
    }

    const Dataset& dataset() const { return *ds_; }
    PolicyKind kind() const { return kind_; }
    int next_slice() const { return next_slice_; }
    const std::vector<SliceMetrics>& metrics() const { return metrics_; }
    const std::vector<ReplayRecord>& buffer() const { return buffer_; }
    const std::vector<int>& chosen_actions() const { return chosen_; }
    const RewardOracle& oracle() const { return oracle_; }
    const UtilityNetParams& params() const { return params_; }
    const OptimizerState& opt() const { return opt_; }
    const UcbState& ucb() const { return ucb_; }
    const BinaryRouterParams& binary() const { return binary_; }
    const ProtocolStats& stats() const { return stats_; }

private:
    const Dataset* ds_; // not owned; must outlive the runner
    PolicyKind kind_;
    ProtocolConfig pc_;
    TrainConfig tc_;
    RewardOracle oracle_;
    std::vector<std::pair<int, int>> bounds_;
    Rng decide_rng_;

    UtilityNetParams params_;
    OptimizerState opt_;
    UcbState ucb_;
    BinaryRouterParams binary_;

    std::vector<ReplayRecord> buffer_;
    std::vector<int> chosen_;
    std::vector<SliceMetrics> metrics_;
    ProtocolStats stats_;
    double cum_reward_ = 0.0;
    int next_slice_ = 0;
};

struct ProtocolResult {
    std::vector<SliceMetrics> metrics;
    std::vector<int> chosen;
    ProtocolStats stats;
};

inline ProtocolResult run_protocol(const Dataset& ds, PolicyKind kind, const ProtocolConfig& pc,
                                   const RewardParams& rp, const UcbConfig& uc = UcbConfig{},
                                   const TrainConfig& tc = TrainConfig{}) {
    ProtocolRunner runner(ds, kind, pc, rp, uc, tc);
    runner.run_all();
    return ProtocolResult{runner.metrics(), runner.chosen_actions(), runner.stats()};
}

} // namespace routeucb
