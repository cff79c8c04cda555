#pragma once
// Utility estimator network. Two input branches (text embedding; meta features
// concatenated with a learned domain embedding) feed a three-layer utility
// trunk whose last hidden layer is also the UCB feature map, plus a
// context-only gating branch. Training is plain backprop with an
// adaptive-moment optimizer; everything is seeded and deterministic.

#include "routeucb/dataset.hpp"
#include "routeucb/linalg.hpp"
#include "routeucb/replay.hpp"
#include "routeucb/rng.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace routeucb {

namespace net {

// Hidden widths are part of the architecture; only (E, D, K) vary per dataset.
inline constexpr int kTextHidden = 256;
inline constexpr int kDomainEmbDim = 16;
inline constexpr int kFeatIn = kNumMetaFeatures + kDomainEmbDim; // 19
inline constexpr int kFeatHidden = 32;
inline constexpr int kActionEmbDim = 32;
inline constexpr int kTrunkIn = kTextHidden + kFeatHidden + kActionEmbDim; // 320
inline constexpr int kTrunk1 = 256;
inline constexpr int kTrunk2 = 256;
inline constexpr int kLastHidden = 128; // H, the UCB feature width
inline constexpr int kGateIn = kTextHidden + kFeatHidden; // 288
inline constexpr int kGateHidden = 64;

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace net

// ---- parameters ----

struct Affine {
    Mat w; // rows = out, cols = in
    Vec b;

    Affine() = default;
    Affine(int out, int in) : w(out, in), b(static_cast<std::size_t>(out), 0.0) {}
};

struct UtilityNetParams {
    int embed_dim = 0;   // E
    int num_domains = 0; // D
    int num_actions = 0; // K

    Affine text_mlp;     // E -> 256
    Mat domain_emb;      // D x 16
    Affine feature_mlp;  // 19 -> 32
    Mat action_emb;      // K x 32
    Affine trunk1;       // 320 -> 256
    Affine trunk2;       // 256 -> 256
    Affine trunk3;       // 256 -> 128
    Affine utility_head; // 128 -> 1
    Affine gating_mlp;   // 288 -> 64
    Affine gating_head;  // 64 -> 1
};

// Closed-form parameter count; construction asserts the allocated tensors
// agree with it.
inline std::int64_t param_count(int embed_dim, int num_domains, int num_actions) {
    using namespace net;
    std::int64_t n = 0;
    n += static_cast<std::int64_t>(kTextHidden) * embed_dim + kTextHidden;
    n += static_cast<std::int64_t>(num_domains) * kDomainEmbDim;
    n += static_cast<std::int64_t>(kFeatHidden) * kFeatIn + kFeatHidden;
    n += static_cast<std::int64_t>(num_actions) * kActionEmbDim;
    n += static_cast<std::int64_t>(kTrunk1) * kTrunkIn + kTrunk1;
    n += static_cast<std::int64_t>(kTrunk2) * kTrunk1 + kTrunk2;
    n += static_cast<std::int64_t>(kLastHidden) * kTrunk2 + kLastHidden;
    n += kLastHidden + 1;
    n += static_cast<std::int64_t>(kGateHidden) * kGateIn + kGateHidden;
    n += kGateHidden + 1;
    return n;
}

// Flat views over every tensor, in checkpoint declaration order. Keep the two
// overloads and the name list in sync.
inline std::vector<Vec*> tensor_list(UtilityNetParams& p) {
    return {&p.text_mlp.w.a,     &p.text_mlp.b,    &p.domain_emb.a,
            &p.feature_mlp.w.a,  &p.feature_mlp.b, &p.action_emb.a,
            &p.trunk1.w.a,       &p.trunk1.b,      &p.trunk2.w.a,
            &p.trunk2.b,         &p.trunk3.w.a,    &p.trunk3.b,
            &p.utility_head.w.a, &p.utility_head.b, &p.gating_mlp.w.a,
            &p.gating_mlp.b,     &p.gating_head.w.a, &p.gating_head.b};
}

inline std::vector<const Vec*> tensor_list(const UtilityNetParams& p) {
    auto mut = tensor_list(const_cast<UtilityNetParams&>(p));
    return std::vector<const Vec*>(mut.begin(), mut.end());
}

inline const std::vector<std::string>& tensor_names() {
    static const std::vector<std::string> names = {
        "text_mlp.w",     "text_mlp.b",    "domain_emb",
        "feature_mlp.w",  "feature_mlp.b", "action_emb",
        "trunk1.w",       "trunk1.b",      "trunk2.w",
        "trunk2.b",       "trunk3.w",      "trunk3.b",
        "utility_head.w", "utility_head.b", "gating_mlp.w",
        "gating_mlp.b",   "gating_head.w", "gating_head.b"};
    return names;
}

inline std::int64_t param_count(const UtilityNetParams& p) {
    std::int64_t n = 0;
    for (const Vec* t : tensor_list(p)) n += static_cast<std::int64_t>(t->size());
    return n;
}

// Same shapes as p, all zeros. Doubles as the gradient container.
inline UtilityNetParams zeros_like(const UtilityNetParams& p) {
    using namespace net;
    UtilityNetParams z;
    z.embed_dim = p.embed_dim;
    z.num_domains = p.num_domains;
    z.num_actions = p.num_actions;
    z.text_mlp = Affine(kTextHidden, p.embed_dim);
    z.domain_emb = Mat(p.num_domains, kDomainEmbDim);
    z.feature_mlp = Affine(kFeatHidden, kFeatIn);
    z.action_emb = Mat(p.num_actions, kActionEmbDim);
    z.trunk1 = Affine(kTrunk1, kTrunkIn);
    z.trunk2 = Affine(kTrunk2, kTrunk1);
    z.trunk3 = Affine(kLastHidden, kTrunk2);
    z.utility_head = Affine(1, kLastHidden);
    z.gating_mlp = Affine(kGateHidden, kGateIn);
    z.gating_head = Affine(1, kGateHidden);
    return z;
}

inline void fill_zero(UtilityNetParams& p) {
    for (Vec* t : tensor_list(p)) std::fill(t->begin(), t->end(), 0.0);
}

// Uniform fan-in init for affine layers, N(0, 0.1) for embedding tables.
inline UtilityNetParams init_params(int embed_dim, int num_domains, int num_actions,
                                    std::uint64_t seed) {
    if (embed_dim < 1 || num_domains < 1 || num_actions < 1)
        throw std::invalid_argument("init_params: dims must be positive");
    UtilityNetParams proto;
    proto.embed_dim = embed_dim;
    proto.num_domains = num_domains;
    proto.num_actions = num_actions;
    UtilityNetParams p = zeros_like(proto);

    Rng rng(mix_seed(seed, 0x0E70));
    auto init_affine = [&](Affine& l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(l.w.cols));
        for (double& x : l.w.a) x = rng.uniform(-bound, bound);
        for (double& x : l.b) x = rng.uniform(-bound, bound);
    };
    auto init_table = [&](Mat& t) {
        for (double& x : t.a) x = 0.1 * rng.normal();
    };
    init_affine(p.text_mlp);
    init_table(p.domain_emb);
    init_affine(p.feature_mlp);
    init_table(p.action_emb);
    init_affine(p.trunk1);
    init_affine(p.trunk2);
    init_affine(p.trunk3);
    init_affine(p.utility_head);
    init_affine(p.gating_mlp);
    init_affine(p.gating_head);

    if (param_count(p) != param_count(embed_dim, num_domains, num_actions))
        throw std::logic_error("init_params: tensor shapes disagree with the closed-form count");
    return p;
}

// ---- forward ----

struct ForwardTrace {
    int action = 0;
    int domain = 0;
    // Post-activation values named as in the architecture; pre-activation
    // copies kept for backprop.
    Vec feat_in;   // 19: [features, domain_emb[d]]
    Vec pre_text, h_emb;  // 256
    Vec pre_feat, h_feat; // 32
    Vec trunk_in;         // 320: [h_emb, h_feat, action_emb[a]]
    Vec pre_t1, h_t1;     // 256
    Vec pre_t2, h_t2;     // 256
    Vec pre_t3, h_last;   // 128
    Vec gate_in;          // 288: [h_emb, h_feat]
    Vec pre_gate, h_gate; // 64
    double mu = 0.0;         // raw utility-head output, not squashed
    double gate_logit = 0.0;
    double gate_prob = 0.5;
};

namespace detail {

inline Vec affine_apply(const Affine& l, const Vec& x) {
    Vec y = matvec(l.w, x);
    for (int i = 0; i < l.w.rows; ++i) y[static_cast<std::size_t>(i)] += l.b[static_cast<std::size_t>(i)];
    return y;
}

inline Vec relu_of(const Vec& x) {
    Vec y = x;
    for (double& v : y)
        if (v < 0.0) v = 0.0;
    return y;
}

// Shared (action-independent) part of a trace: both input branches and the
// gating branch.
inline ForwardTrace forward_shared(const UtilityNetParams& p, const RoutingContext& ctx) {
    using namespace net;
    if (ctx.domain_id < 0 || ctx.domain_id >= p.num_domains)
        throw std::out_of_range("forward: domain id " + std::to_string(ctx.domain_id) +
                                " outside [0," + std::to_string(p.num_domains) + ")");
    if (static_cast<int>(ctx.embedding.size()) != p.embed_dim)
        throw std::invalid_argument("forward: embedding length " +
                                    std::to_string(ctx.embedding.size()) + " != E=" +
                                    std::to_string(p.embed_dim));
    ForwardTrace t;
    t.domain = ctx.domain_id;

    t.pre_text = affine_apply(p.text_mlp, ctx.embedding);
    t.h_emb = relu_of(t.pre_text);

    t.feat_in.resize(kFeatIn);
    for (int i = 0; i < kNumMetaFeatures; ++i) t.feat_in[static_cast<std::size_t>(i)] = ctx.features[static_cast<std::size_t>(i)];
    const double* drow = p.domain_emb.row(ctx.domain_id);
    for (int i = 0; i < kDomainEmbDim; ++i) t.feat_in[static_cast<std::size_t>(kNumMetaFeatures + i)] = drow[i];
    t.pre_feat = affine_apply(p.feature_mlp, t.feat_in);
    t.h_feat = relu_of(t.pre_feat);

    t.gate_in.reserve(kGateIn);
    t.gate_in = t.h_emb;
    t.gate_in.insert(t.gate_in.end(), t.h_feat.begin(), t.h_feat.end());
    t.pre_gate = affine_apply(p.gating_mlp, t.gate_in);
    t.h_gate = relu_of(t.pre_gate);
    t.gate_logit = dot(p.gating_head.w.a, t.h_gate) + p.gating_head.b[0];
    t.gate_prob = sigmoid(t.gate_logit);
    return t;
}

// Utility trunk for one action, on top of a shared trace.
inline void forward_action(const UtilityNetParams& p, int action, ForwardTrace& t) {
    using namespace net;
    if (action < 0 || action >= p.num_actions)
        throw std::out_of_range("forward: action " + std::to_string(action) + " outside [0," +
                                std::to_string(p.num_actions) + ")");
    t.action = action;
    t.trunk_in.resize(0);
    t.trunk_in.reserve(kTrunkIn);
    t.trunk_in.insert(t.trunk_in.end(), t.h_emb.begin(), t.h_emb.end());
    t.trunk_in.insert(t.trunk_in.end(), t.h_feat.begin(), t.h_feat.end());
    const double* arow = p.action_emb.row(action);
    t.trunk_in.insert(t.trunk_in.end(), arow, arow + kActionEmbDim);

    t.pre_t1 = affine_apply(p.trunk1, t.trunk_in);
    t.h_t1 = relu_of(t.pre_t1);
    t.pre_t2 = affine_apply(p.trunk2, t.h_t1);
    t.h_t2 = relu_of(t.pre_t2);
    t.pre_t3 = affine_apply(p.trunk3, t.h_t2);
    t.h_last = relu_of(t.pre_t3);
    t.mu = dot(p.utility_head.w.a, t.h_last) + p.utility_head.b[0];
}

} // namespace detail

inline ForwardTrace forward(const UtilityNetParams& p, const RoutingContext& ctx, int action) {
    ForwardTrace t = detail::forward_shared(p, ctx);
    detail::forward_action(p, action, t);
    return t;
}

// One trace per action; the two input branches and the gate are computed once
// and shared, so traces differ only downstream of the action embedding.
inline std::vector<ForwardTrace> forward_all_actions(const UtilityNetParams& p,
                                                     const RoutingContext& ctx) {
    const ForwardTrace shared = detail::forward_shared(p, ctx);
    std::vector<ForwardTrace> traces(static_cast<std::size_t>(p.num_actions), shared);
    for (int a = 0; a < p.num_actions; ++a) detail::forward_action(p, a, traces[static_cast<std::size_t>(a)]);
    return traces;
}

// ---- loss and gradients ----

inline double huber(double resid, double delta) {
    const double r = std::fabs(resid);
    if (r <= delta) return 0.5 * resid * resid;
    return delta * (r - 0.5 * delta);
}

inline double huber_grad(double resid, double delta) {
    if (resid > delta) return delta;
    if (resid < -delta) return -delta;
    return resid;
}

// Numerically safe BCE on the logit: max(z,0) - z*y + log1p(exp(-|z|)).
inline double bce_with_logit(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
}

namespace detail {

// d_in += W^T d_out, grads.w += d_out x in, grads.b += d_out.
inline void backprop_affine(const Affine& l, const Vec& in, const Vec& d_out, Affine& g,
                            Vec* d_in) {
    for (int r = 0; r < l.w.rows; ++r) {
        const double dr = d_out[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        const double* wr = l.w.row(r);
        double* gr = g.w.row(r);
        for (int c = 0; c < l.w.cols; ++c) gr[c] += dr * in[static_cast<std::size_t>(c)];
        g.b[static_cast<std::size_t>(r)] += dr;
        if (d_in)
            for (int c = 0; c < l.w.cols; ++c) (*d_in)[static_cast<std::size_t>(c)] += dr * wr[c];
    }
}

inline void relu_mask(const Vec& pre, Vec& d) {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (pre[i] <= 0.0) d[i] = 0.0;
}

} // namespace detail

// Mean loss over the indexed records: Huber(mu - r) + gate_weight * BCE(p, y).
// Gradients are accumulated into `grads` (zeroed here) by exact backprop; the
// shared branches receive summed contributions from both heads.
inline double loss_and_gradients_indexed(const UtilityNetParams& p,
                                         const std::vector<ReplayRecord>& buffer,
                                         const std::vector<int>& order, int begin, int end,
                                         UtilityNetParams& grads, double huber_delta = 1.0,
                                         double gate_weight = 1.0) {
    using namespace net;
    if (begin >= end) throw std::invalid_argument("loss_and_gradients: empty batch");
    fill_zero(grads);
    const double inv_n = 1.0 / static_cast<double>(end - begin);
    double loss = 0.0;

    for (int bi = begin; bi < end; ++bi) {
        const ReplayRecord& rec = buffer[static_cast<std::size_t>(order[static_cast<std::size_t>(bi)])];
        const ForwardTrace t = forward(p, rec.context, rec.action);

        const double resid = t.mu - rec.reward;
        const double y = static_cast<double>(rec.gate_label);
        loss += inv_n * (huber(resid, huber_delta) + gate_weight * bce_with_logit(t.gate_logit, y));

        const double dmu = inv_n * huber_grad(resid, huber_delta);
        const double dz = inv_n * gate_weight * (sigmoid(t.gate_logit) - y);

        Vec d_h_emb(static_cast<std::size_t>(kTextHidden), 0.0);
        Vec d_h_feat(static_cast<std::size_t>(kFeatHidden), 0.0);

        // utility head and trunk
        if (dmu != 0.0) {
            Vec d_mu_vec(1, dmu);
            Vec d_h_last(static_cast<std::size_t>(kLastHidden), 0.0);
            detail::backprop_affine(p.utility_head, t.h_last, d_mu_vec, grads.utility_head, &d_h_last);
            detail::relu_mask(t.pre_t3, d_h_last);
            Vec d_h_t2(static_cast<std::size_t>(kTrunk2), 0.0);
            detail::backprop_affine(p.trunk3, t.h_t2, d_h_last, grads.trunk3, &d_h_t2);
            detail::relu_mask(t.pre_t2, d_h_t2);
            Vec d_h_t1(static_cast<std::size_t>(kTrunk1), 0.0);
            detail::backprop_affine(p.trunk2, t.h_t1, d_h_t2, grads.trunk2, &d_h_t1);
            detail::relu_mask(t.pre_t1, d_h_t1);
            Vec d_trunk_in(static_cast<std::size_t>(kTrunkIn), 0.0);
            detail::backprop_affine(p.trunk1, t.trunk_in, d_h_t1, grads.trunk1, &d_trunk_in);
            for (int i = 0; i < kTextHidden; ++i) d_h_emb[static_cast<std::size_t>(i)] += d_trunk_in[static_cast<std::size_t>(i)];
            for (int i = 0; i < kFeatHidden; ++i) d_h_feat[static_cast<std::size_t>(i)] += d_trunk_in[static_cast<std::size_t>(kTextHidden + i)];
            double* ga = grads.action_emb.row(rec.action);
            for (int i = 0; i < kActionEmbDim; ++i) ga[i] += d_trunk_in[static_cast<std::size_t>(kTextHidden + kFeatHidden + i)];
        }

        // gating branch
        if (dz != 0.0) {
            Vec d_z_vec(1, dz);
            Vec d_h_gate(static_cast<std::size_t>(kGateHidden), 0.0);
            detail::backprop_affine(p.gating_head, t.h_gate, d_z_vec, grads.gating_head, &d_h_gate);
            detail::relu_mask(t.pre_gate, d_h_gate);
            Vec d_gate_in(static_cast<std::size_t>(kGateIn), 0.0);
            detail::backprop_affine(p.gating_mlp, t.gate_in, d_h_gate, grads.gating_mlp, &d_gate_in);
            for (int i = 0; i < kTextHidden; ++i) d_h_emb[static_cast<std::size_t>(i)] += d_gate_in[static_cast<std::size_t>(i)];
            for (int i = 0; i < kFeatHidden; ++i) d_h_feat[static_cast<std::size_t>(i)] += d_gate_in[static_cast<std::size_t>(kTextHidden + i)];
        }

        // shared input branches
        detail::relu_mask(t.pre_text, d_h_emb);
        detail::backprop_affine(p.text_mlp, rec.context.embedding, d_h_emb, grads.text_mlp, nullptr);

        detail::relu_mask(t.pre_feat, d_h_feat);
        Vec d_feat_in(static_cast<std::size_t>(kFeatIn), 0.0);
        detail::backprop_affine(p.feature_mlp, t.feat_in, d_h_feat, grads.feature_mlp, &d_feat_in);
        double* gd = grads.domain_emb.row(t.domain);
        for (int i = 0; i < kDomainEmbDim; ++i) gd[i] += d_feat_in[static_cast<std::size_t>(kNumMetaFeatures + i)];
    }
    return loss;
}

inline double loss_and_gradients(const UtilityNetParams& p, const std::vector<ReplayRecord>& batch,
                                 UtilityNetParams& grads, double huber_delta = 1.0,
                                 double gate_weight = 1.0) {
    std::vector<int> order(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) order[i] = static_cast<int>(i);
    return loss_and_gradients_indexed(p, batch, order, 0, static_cast<int>(batch.size()), grads,
                                      huber_delta, gate_weight);
}

// ---- optimizer ----

struct OptimizerState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step = 0;
    UtilityNetParams m; // first moments, parameter-shaped
    UtilityNetParams v; // second moments, parameter-shaped
};

inline OptimizerState make_optimizer(const UtilityNetParams& p, double lr = 1e-3) {
    OptimizerState o;
    o.lr = lr;
    o.m = zeros_like(p);
    o.v = zeros_like(p);
    return o;
}

inline void adam_step(UtilityNetParams& p, OptimizerState& o, const UtilityNetParams& grads) {
    ++o.step;
    const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(o.step));
    const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(o.step));
    auto pt = tensor_list(p);
    auto mt = tensor_list(o.m);
    auto vt = tensor_list(o.v);
    auto gt = tensor_list(grads);
    for (std::size_t k = 0; k < pt.size(); ++k) {
        Vec& w = *pt[k];
        Vec& m = *mt[k];
        Vec& v = *vt[k];
        const Vec& g = *gt[k];
        if (w.size() != g.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch on " + tensor_names()[k]);
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
            v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
        }
    }
}

// ---- training loop ----

// `epochs` seeded-shuffled full passes over the buffer in minibatches.
// Returns the per-epoch mean loss (one entry per epoch). Deterministic given
// (params, opt, buffer, seed).
inline Vec train_epochs(UtilityNetParams& p, OptimizerState& o,
                        const std::vector<ReplayRecord>& buffer, int epochs, int batch_size,
                        std::uint64_t seed, double huber_delta = 1.0, double gate_weight = 1.0) {
    if (buffer.empty()) throw std::invalid_argument("train_epochs: empty buffer");
    if (batch_size < 1) throw std::invalid_argument("train_epochs: batch_size must be positive");
    const int n = static_cast<int>(buffer.size());
    std::vector<int> order(buffer.size());
    UtilityNetParams grads = zeros_like(p);
    Vec epoch_loss;
    epoch_loss.reserve(static_cast<std::size_t>(std::max(epochs, 0)));
    for (int e = 0; e < epochs; ++e) {
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(e) + 0x7E0C));
        rng.shuffle(order);
        double sum = 0.0;
        for (int begin = 0; begin < n; begin += batch_size) {
            const int end = std::min(n, begin + batch_size);
            const double l = loss_and_gradients_indexed(p, buffer, order, begin, end, grads,
                                                        huber_delta, gate_weight);
            sum += l * (end - begin);
            adam_step(p, o, grads);
        }
        epoch_loss.push_back(sum / n);
    }
    return epoch_loss;
}

// ---- checkpointing ----

// Binary container, native byte order: magic, version, (E, D, K), parameter
// tensors in declaration order, then optimizer scalars and moment tensors.
inline constexpr char kCheckpointMagic[8] = {'R', 'U', 'C', 'B', 'N', 'E', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NetCheckpoint {
    UtilityNetParams params;
    OptimizerState opt;
};

namespace detail {

inline void write_raw(std::ofstream& f, const void* p, std::size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_raw(std::ifstream& f, void* p, std::size_t n, const std::string& path) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (f.gcount() != static_cast<std::streamsize>(n))
        throw std::runtime_error("checkpoint: truncated file '" + path + "'");
}

} // namespace detail

inline void save_checkpoint(const UtilityNetParams& p, const OptimizerState& o,
                            const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    detail::write_raw(f, kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::write_raw(f, &kCheckpointVersion, sizeof(kCheckpointVersion));
    const std::int32_t dims[3] = {static_cast<std::int32_t>(p.embed_dim),
                                  static_cast<std::int32_t>(p.num_domains),
                                  static_cast<std::int32_t>(p.num_actions)};
    detail::write_raw(f, dims, sizeof(dims));
    for (const Vec* t : tensor_list(p)) detail::write_raw(f, t->data(), t->size() * sizeof(double));
    detail::write_raw(f, &o.step, sizeof(o.step));
    const double scalars[4] = {o.lr, o.beta1, o.beta2, o.eps};
    detail::write_raw(f, scalars, sizeof(scalars));
    for (const Vec* t : tensor_list(o.m)) detail::write_raw(f, t->data(), t->size() * sizeof(double));
    for (const Vec* t : tensor_list(o.v)) detail::write_raw(f, t->data(), t->size() * sizeof(double));
    if (!f) throw std::runtime_error("checkpoint: write failed on '" + path + "'");
}

// Pass expected dims >= 0 to enforce them; -1 accepts whatever the file holds.
inline NetCheckpoint load_checkpoint(const std::string& path, int expect_e = -1, int expect_d = -1,
                                     int expect_k = -1) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    detail::read_raw(f, magic, sizeof(magic), path);
    if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    std::uint32_t version = 0;
    detail::read_raw(f, &version, sizeof(version), path);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version) +
                                 " in '" + path + "'");
    std::int32_t dims[3];
    detail::read_raw(f, dims, sizeof(dims), path);
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
        throw std::runtime_error("checkpoint: corrupt dimension header in '" + path + "'");
    if ((expect_e >= 0 && dims[0] != expect_e) || (expect_d >= 0 && dims[1] != expect_d) ||
        (expect_k >= 0 && dims[2] != expect_k))
        throw std::runtime_error("checkpoint: dimension mismatch in '" + path + "': file has E=" +
                                 std::to_string(dims[0]) + " D=" + std::to_string(dims[1]) +
                                 " K=" + std::to_string(dims[2]));

    NetCheckpoint ck;
    UtilityNetParams proto;
    proto.embed_dim = dims[0];
    proto.num_domains = dims[1];
    proto.num_actions = dims[2];
    ck.params = zeros_like(proto);
    ck.opt.m = zeros_like(proto);
    ck.opt.v = zeros_like(proto);
    for (Vec* t : tensor_list(ck.params)) detail::read_raw(f, t->data(), t->size() * sizeof(double), path);
    detail::read_raw(f, &ck.opt.step, sizeof(ck.opt.step), path);
    double scalars[4];
    detail::read_raw(f, scalars, sizeof(scalars), path);
    ck.opt.lr = scalars[0];
    ck.opt.beta1 = scalars[1];
    ck.opt.beta2 = scalars[2];
    ck.opt.eps = scalars[3];
    for (Vec* t : tensor_list(ck.opt.m)) detail::read_raw(f, t->data(), t->size() * sizeof(double), path);
    for (Vec* t : tensor_list(ck.opt.v)) detail::read_raw(f, t->data(), t->size() * sizeof(double), path);
    f.peek();
    if (!f.eof()) throw std::runtime_error("checkpoint: trailing bytes in '" + path + "'");
    return ck;
}

} // namespace routeucb
