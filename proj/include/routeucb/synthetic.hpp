#ifndef ROUTEUCB_SYNTHETIC_HPP
#define ROUTEUCB_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "routeucb/dataset.hpp"
#include "routeucb/rng.hpp"

namespace routeucb {

struct SyntheticSpec {
    std::uint64_t seed = 0;
    int num_samples = 0; // n
    int num_actions = 0; // K
    int num_domains = 0; // D
    int embed_dim = 0;   // E
};

// Per-sample generator intent, recoverable by regenerating with the same spec.
// planted_best[i] is the action the planted structure makes reward-optimal for
// sample i before observation noise.
struct SyntheticInfo {
    std::vector<int> planted_best;
    std::vector<double> difficulty;
};

namespace synth {

// Landscape constants. Chosen so that, mirroring the benchmark this stands in
// for: easy queries are common enough that cheap actions are solid baselines
// (a mid-cheap action is the best single arm), yet every action is
// reward-optimal somewhere and the optimum is a learnable function of the
// embedding through each domain's hidden direction.
inline constexpr double kCostLo = 0.4;
inline constexpr double kCostHi = 40.0;
inline constexpr double kQualitySteepness = 11.0;
inline constexpr double kQualityNoiseSigma = 0.04;
inline constexpr double kCostJitter = 0.15;
inline constexpr double kDifficultyGain = 1.0;
inline constexpr double kDifficultySpan = 2.0;  // difficulty range width
inline constexpr double kDifficultyFloor = -0.9;
inline constexpr double kDomainBiasMean = -0.7;
inline constexpr double kDomainBiasSigma = 1.4;
// Quality decays once capability overshoots difficulty by more than the
// threshold; this is what keeps over-provisioned expensive actions from being
// a free lunch on easy queries.
inline constexpr double kOverkillThreshold = 0.5;
inline constexpr double kOverkillRate = 0.7;
inline constexpr double kOverkillMax = 1.0;
inline constexpr double kRefRewardLambda = 1.0; // reward strength used to plant the optimum

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double capability(int action, int num_actions) {
    if (num_actions <= 1) return 1.0;
    return static_cast<double>(action) / (num_actions - 1);
}

inline double base_cost(int action, int num_actions) {
    return kCostLo * std::pow(kCostHi / kCostLo, capability(action, num_actions));
}

// Noise-free planted quality: logistic success probability times the
// overkill decay.
inline double clean_quality(double cap, double difficulty) {
    const double q = sigmoid(kQualitySteepness * (cap - difficulty));
    const double overshoot = std::min(kOverkillMax, std::max(0.0, cap - difficulty - kOverkillThreshold));
    return q * (1.0 - kOverkillRate * overshoot);
}

} // namespace synth

// Deterministic in spec. Plants a per-domain hidden difficulty direction:
// quality is a logistic function of (action capability - difficulty), cost
// grows geometrically with capability, so which action wins the utility
// reward depends on where the embedding falls along the domain's direction.
inline Dataset generate_synthetic(const SyntheticSpec& spec, SyntheticInfo* info = nullptr) {
    if (spec.num_samples < spec.num_actions)
        throw std::invalid_argument("generate_synthetic: need n >= K");
    if (spec.num_actions < 1) throw std::invalid_argument("generate_synthetic: need K >= 1");
    if (spec.num_domains < 1) throw std::invalid_argument("generate_synthetic: need D >= 1");
    if (spec.embed_dim < 2) throw std::invalid_argument("generate_synthetic: need E >= 2");

    const int n = spec.num_samples, num_k = spec.num_actions, num_d = spec.num_domains, dim = spec.embed_dim;
    Rng rng(mix_seed(spec.seed, 0x5D47));

    // hidden per-domain structure
    std::vector<Vec> domain_dir(static_cast<std::size_t>(num_d));
    Vec domain_bias(static_cast<std::size_t>(num_d));
    Vec domain_weight(static_cast<std::size_t>(num_d));
    double weight_sum = 0.0;
    for (int d = 0; d < num_d; ++d) {
        Vec dir(static_cast<std::size_t>(dim));
        double norm2 = 0.0;
        for (auto& x : dir) {
            x = rng.normal();
            norm2 += x * x;
        }
        const double inv_norm = 1.0 / std::sqrt(std::max(norm2, 1e-12));
        for (auto& x : dir) x *= inv_norm;
        domain_dir[static_cast<std::size_t>(d)] = std::move(dir);
        domain_bias[static_cast<std::size_t>(d)] = rng.normal(synth::kDomainBiasMean, synth::kDomainBiasSigma);
        domain_weight[static_cast<std::size_t>(d)] = 0.5 + rng.uniform();
        weight_sum += domain_weight[static_cast<std::size_t>(d)];
    }
    for (auto& w : domain_weight) w /= weight_sum;

    // nominal cost normalization used to plant the optimum (jitter-free)
    Vec nominal_cnorm(static_cast<std::size_t>(num_k));
    for (int a = 0; a < num_k; ++a)
        nominal_cnorm[static_cast<std::size_t>(a)] =
            std::log1p(synth::base_cost(a, num_k)) / std::log1p(synth::kCostHi);

    Dataset ds;
    ds.header.num_actions = num_k;
    ds.header.num_domains = num_d;
    ds.header.embed_dim = dim;
    for (int a = 0; a < num_k; ++a) ds.header.model_names.push_back("model_" + std::to_string(a));

    if (info) {
        info->planted_best.assign(static_cast<std::size_t>(n), 0);
        info->difficulty.assign(static_cast<std::size_t>(n), 0.0);
    }

    char idbuf[32];
    ds.samples.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Sample s;
        std::snprintf(idbuf, sizeof(idbuf), "q%06d", i);
        s.id = idbuf;

        const double u = rng.uniform();
        double cum = 0.0;
        int d = num_d - 1;
        for (int j = 0; j < num_d; ++j) {
            cum += domain_weight[static_cast<std::size_t>(j)];
            if (u < cum) {
                d = j;
                break;
            }
        }
        s.domain_id = d;

        s.embedding.resize(static_cast<std::size_t>(dim));
        double proj = 0.0;
        for (int e = 0; e < dim; ++e) {
            s.embedding[static_cast<std::size_t>(e)] = rng.normal();
            proj += s.embedding[static_cast<std::size_t>(e)] * domain_dir[static_cast<std::size_t>(d)][static_cast<std::size_t>(e)];
        }
        const double difficulty =
            synth::kDifficultySpan *
                synth::sigmoid(synth::kDifficultyGain * proj + domain_bias[static_cast<std::size_t>(d)]) +
            synth::kDifficultyFloor;

        const double length_proxy = std::exp(rng.normal(3.0 + 0.9 * difficulty, 0.2));
        s.features[0] = length_proxy / 100.0;
        s.features[1] = std::log1p(length_proxy) / 8.0;
        s.features[2] = domain_weight[static_cast<std::size_t>(d)] * num_d;

        s.quality.resize(static_cast<std::size_t>(num_k));
        s.cost.resize(static_cast<std::size_t>(num_k));
        int best = 0;
        double best_reward = -1.0;
        for (int a = 0; a < num_k; ++a) {
            const double clean_q = synth::clean_quality(synth::capability(a, num_k), difficulty);
            const double q = std::min(1.0, std::max(0.0, clean_q + rng.normal(0.0, synth::kQualityNoiseSigma)));
            const double c = synth::base_cost(a, num_k) * rng.uniform(1.0 - synth::kCostJitter, 1.0 + synth::kCostJitter);
            s.quality[static_cast<std::size_t>(a)] = q;
            s.cost[static_cast<std::size_t>(a)] = c;
            const double planted_reward =
                clean_q * std::exp(-synth::kRefRewardLambda * nominal_cnorm[static_cast<std::size_t>(a)]);
            if (planted_reward > best_reward) {
                best_reward = planted_reward;
                best = a;
            }
        }
        if (info) {
            info->planted_best[static_cast<std::size_t>(i)] = best;
            info->difficulty[static_cast<std::size_t>(i)] = difficulty;
        }
        ds.samples.push_back(std::move(s));
    }

    ds.header.cmax = recompute_cmax(ds);
    return ds;
}

} // namespace routeucb

#endif
