#pragma once
// NeuralUCB action selection. Scores every action as mu + beta * sqrt(g' A^-1 g)
// over the net's last hidden features (plus a constant-1 bias entry), with one
// inverse covariance shared across actions. A context-only gate decides whether
// the exploratory UCB argmax or the mean-based safe action is used.

#include "routeucb/linalg.hpp"
#include "routeucb/replay.hpp"
#include "routeucb/utility_net.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace routeucb {

inline constexpr int kUcbDim = net::kLastHidden + 1; // 129

struct UcbConfig {
    double beta = 1.0;    // exploration coefficient
    double lambda0 = 1.0; // ridge initializer for A
    double tau_g = 0.5;   // gate threshold; gate_prob >= tau_g selects the UCB branch
};

struct UcbState {
    Mat a_inv; // kUcbDim x kUcbDim, symmetric positive-definite
    double beta = 1.0;
    double lambda0 = 1.0;
    double tau_g = 0.5;
    std::int64_t update_count = 0;
};

// dim is the augmented feature length; overriding it off kUcbDim sizes the
// state for feature vectors other than the net's (small-dimension checks).
inline UcbState make_ucb_state(const UcbConfig& cfg, int dim = kUcbDim) {
    if (cfg.lambda0 <= 0.0) throw std::invalid_argument("make_ucb_state: lambda0 must be positive");
    if (cfg.beta < 0.0) throw std::invalid_argument("make_ucb_state: beta must be non-negative");
    if (dim < 1) throw std::invalid_argument("make_ucb_state: dim must be positive");
    UcbState s;
    s.a_inv = Mat::identity(dim, 1.0 / cfg.lambda0);
    s.beta = cfg.beta;
    s.lambda0 = cfg.lambda0;
    s.tau_g = cfg.tau_g;
    return s;
}

// g(x,a) = [h(x,a); 1]; the appended 1 is the bias entry of the linear model
// the covariance lives in.
inline Vec augment_feature(const Vec& h) {
    Vec g = h;
    g.push_back(1.0);
    return g;
}

struct UcbScore {
    double score = 0.0;
    double bonus = 0.0;
};

// Tiny negative quadratic forms are symmetrization residue and clamp to zero;
// anything below -1e-9 means A_inv lost positive-definiteness.
inline UcbScore ucb_score(double mu, const Vec& g, const UcbState& s) {
    if (static_cast<int>(g.size()) != s.a_inv.rows)
        throw std::invalid_argument("ucb_score: feature length mismatch");
    const Vec ag = matvec(s.a_inv, g);
    double q = dot(g, ag);
    if (q < -1e-9) throw std::runtime_error("ucb_score: negative quadratic form, A_inv corrupted");
    if (q < 0.0) q = 0.0;
    UcbScore r;
    r.bonus = s.beta * std::sqrt(q);
    r.score = mu + r.bonus;
    return r;
}

struct Decision {
    int chosen_action = 0;
    int safe_action = 0;   // argmax of mu
    bool used_ucb = false; // false => fell back to safe_action
    double gate_prob = 0.5;
    Vec mu_scores;
    Vec bonus_scores;
    Vec ucb_scores;
};

// Selection rule on precomputed scores; ties break to the lowest index.
inline Decision make_decision(const Vec& mu_scores, const Vec& bonus_scores, double gate_prob,
                              double tau_g) {
    if (mu_scores.empty() || mu_scores.size() != bonus_scores.size())
        throw std::invalid_argument("make_decision: score length mismatch");
    Decision d;
    d.gate_prob = gate_prob;
    d.mu_scores = mu_scores;
    d.bonus_scores = bonus_scores;
    d.ucb_scores.resize(mu_scores.size());
    for (std::size_t a = 0; a < mu_scores.size(); ++a) d.ucb_scores[a] = mu_scores[a] + bonus_scores[a];
    for (std::size_t a = 1; a < mu_scores.size(); ++a)
        if (mu_scores[a] > mu_scores[static_cast<std::size_t>(d.safe_action)]) d.safe_action = static_cast<int>(a);
    d.used_ucb = gate_prob >= tau_g;
    if (d.used_ucb) {
        int best = 0;
        for (std::size_t a = 1; a < d.ucb_scores.size(); ++a)
            if (d.ucb_scores[a] > d.ucb_scores[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
        d.chosen_action = best;
    } else {
        d.chosen_action = d.safe_action;
    }
    return d;
}

// Full scoring pass for one context. Reads only the context; rewards stay
// behind the feedback oracle.
inline Decision decide(const UtilityNetParams& p, const UcbState& s, const RoutingContext& ctx) {
    const std::vector<ForwardTrace> traces = forward_all_actions(p, ctx);
    Vec mu(traces.size()), bonus(traces.size());
    for (std::size_t a = 0; a < traces.size(); ++a) {
        mu[a] = traces[a].mu;
        bonus[a] = ucb_score(0.0, augment_feature(traces[a].h_last), s).bonus;
    }
    return make_decision(mu, bonus, traces[0].gate_prob, s.tau_g);
}

// Sherman-Morrison downdate for A <- A + g g': exact, then re-symmetrized to
// stop drift from accumulating over thousands of updates.
inline void rank1_update(UcbState& s, const Vec& g) {
    if (static_cast<int>(g.size()) != s.a_inv.rows)
        throw std::invalid_argument("rank1_update: feature length mismatch");
    const Vec ag = matvec(s.a_inv, g);
    const double denom = 1.0 + dot(g, ag);
    if (denom <= 0.0) throw std::runtime_error("rank1_update: non-positive denominator, A_inv corrupted");
    const double inv_denom = 1.0 / denom;
    for (int r = 0; r < s.a_inv.rows; ++r) {
        double* row = s.a_inv.row(r);
        const double agr = ag[static_cast<std::size_t>(r)] * inv_denom;
        for (int c = 0; c < s.a_inv.cols; ++c) row[c] -= agr * ag[static_cast<std::size_t>(c)];
    }
    symmetrize(s.a_inv);
    ++s.update_count;
}

// Recompute A = lambda0 I + sum g g' over the buffered decisions under the
// CURRENT network parameters and invert directly. Needed after training since
// h(x,a) moves and the accumulated statistics go stale.
inline void rebuild(UcbState& s, const UtilityNetParams& p, const std::vector<ReplayRecord>& buffer) {
    if (buffer.empty()) {
        // restoring before any observation must reproduce the fresh prior
        // bit-for-bit, so skip the factorization round trip
        s.a_inv = Mat::identity(kUcbDim, 1.0 / s.lambda0);
        s.update_count = 0;
        return;
    }
    Mat a = Mat::identity(kUcbDim, s.lambda0);
    for (const ReplayRecord& rec : buffer) {
        const ForwardTrace t = forward(p, rec.context, rec.action);
        const Vec g = augment_feature(t.h_last);
        for (int r = 0; r < kUcbDim; ++r) {
            double* row = a.row(r);
            const double gr = g[static_cast<std::size_t>(r)];
            for (int c = 0; c < kUcbDim; ++c) row[c] += gr * g[static_cast<std::size_t>(c)];
        }
    }
    s.a_inv = spd_inverse(a);
    symmetrize(s.a_inv);
    s.update_count = static_cast<std::int64_t>(buffer.size());
}

} // namespace routeucb
