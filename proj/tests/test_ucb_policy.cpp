#include "routeucb/ucb_policy.hpp"

#include "routeucb/reward.hpp"
#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace routeucb;

namespace {

Vec random_feature(Rng& rng, int dim, double scale = 0.5) {
    Vec g(static_cast<std::size_t>(dim));
    for (auto& x : g) x = scale * rng.normal();
    return g;
}

Eigen::MatrixXd to_eigen(const Mat& m) {
    Eigen::MatrixXd out(m.rows, m.cols);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) out(r, c) = m(r, c);
    return out;
}

} // namespace

TEST_CASE("a fresh covariance state is the scaled identity") {
    UcbConfig cfg;
    cfg.lambda0 = 2.0;
    cfg.beta = 0.7;
    cfg.tau_g = 0.4;
    const UcbState s = make_ucb_state(cfg);
    CHECK(s.a_inv.rows == kUcbDim);
    CHECK(s.a_inv.cols == kUcbDim);
    CHECK(kUcbDim == 129);
    CHECK(s.a_inv(0, 0) == 0.5);
    CHECK(s.a_inv(128, 128) == 0.5);
    CHECK(s.a_inv(3, 7) == 0.0);
    CHECK(s.beta == 0.7);
    CHECK(s.lambda0 == 2.0);
    CHECK(s.tau_g == 0.4);
    CHECK(s.update_count == 0);

    const UcbState small = make_ucb_state(cfg, 5);
    CHECK(small.a_inv.rows == 5);
}

TEST_CASE("make_ucb_state validates its configuration") {
    UcbConfig cfg;
    cfg.lambda0 = 0.0;
    CHECK_THROWS_AS(make_ucb_state(cfg), std::invalid_argument);
    cfg.lambda0 = 1.0;
    cfg.beta = -0.1;
    CHECK_THROWS_AS(make_ucb_state(cfg), std::invalid_argument);
    cfg.beta = 1.0;
    CHECK_THROWS_AS(make_ucb_state(cfg, 0), std::invalid_argument);
}

TEST_CASE("augment_feature appends a bias entry") {
    const Vec h = {0.1, -0.2, 0.3};
    const Vec g = augment_feature(h);
    REQUIRE(g.size() == 4);
    CHECK(g[0] == 0.1);
    CHECK(g[1] == -0.2);
    CHECK(g[2] == 0.3);
    CHECK(g[3] == 1.0);
}

TEST_CASE("scores match hand-worked identity cases") {
    UcbConfig cfg; // beta 1, lambda0 1
    UcbState s = make_ucb_state(cfg, 4);
    const Vec e1 = {1.0, 0.0, 0.0, 0.0};

    // A = I: bonus is ||g||, score = mu + beta * bonus
    UcbScore sc = ucb_score(0.5, e1, s);
    CHECK(sc.bonus == Catch::Approx(1.0).margin(1e-15));
    CHECK(sc.score == Catch::Approx(1.5).margin(1e-15));

    const Vec diag2 = {1.0, 1.0, 0.0, 0.0};
    CHECK(ucb_score(0.0, diag2, s).bonus == Catch::Approx(std::sqrt(2.0)).margin(1e-15));

    UcbConfig wide = cfg;
    wide.beta = 2.0;
    UcbState s2 = make_ucb_state(wide, 4);
    CHECK(ucb_score(0.0, e1, s2).score == Catch::Approx(2.0).margin(1e-15));
}

TEST_CASE("a rank-one update matches the closed form") {
    UcbConfig cfg;
    UcbState s = make_ucb_state(cfg, 4);
    const Vec e1 = {1.0, 0.0, 0.0, 0.0};

    // A = I + e1 e1^T  =>  A^-1 = diag(1/2, 1, 1, 1)
    rank1_update(s, e1);
    CHECK(s.update_count == 1);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            const double expect = r != c ? 0.0 : (r == 0 ? 0.5 : 1.0);
            CHECK(s.a_inv(r, c) == Catch::Approx(expect).margin(1e-15));
        }
    CHECK(ucb_score(0.0, e1, s).bonus == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-15));

    rank1_update(s, e1);
    CHECK(s.a_inv(0, 0) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    CHECK(ucb_score(0.0, e1, s).bonus == Catch::Approx(1.0 / std::sqrt(3.0)).margin(1e-15));
}

TEST_CASE("repeating a direction strictly shrinks its bonus") {
    UcbConfig cfg;
    UcbState s = make_ucb_state(cfg, 8);
    Rng rng(19);
    const Vec g = random_feature(rng, 8, 1.0);
    double last = ucb_score(0.0, g, s).bonus;
    CHECK(last > 0.0);
    for (int i = 0; i < 20; ++i) {
        rank1_update(s, g);
        const double bonus = ucb_score(0.0, g, s).bonus;
        CHECK(bonus < last);
        last = bonus;
    }
}

TEST_CASE("sequential rank-one updates agree with direct inversion") {
    // 16 base features plus the bias entry
    const int dim = 17;
    for (double lambda0 : {1.0, 2.5}) {
        UcbConfig cfg;
        cfg.lambda0 = lambda0;
        UcbState s = make_ucb_state(cfg, dim);

        Rng rng(77);
        Eigen::MatrixXd a = lambda0 * Eigen::MatrixXd::Identity(dim, dim);
        for (int i = 0; i < 100; ++i) {
            Vec g = random_feature(rng, dim - 1);
            g.push_back(1.0);
            rank1_update(s, g);
            Eigen::VectorXd ge(dim);
            for (int r = 0; r < dim; ++r) ge(r) = g[static_cast<std::size_t>(r)];
            a += ge * ge.transpose();
        }
        CHECK(s.update_count == 100);

        const Eigen::MatrixXd direct = a.inverse();
        const double diff = (to_eigen(s.a_inv) - direct).cwiseAbs().maxCoeff();
        INFO("lambda0 " << lambda0 << ": max abs deviation " << diff);
        CHECK(diff < 1e-8);
        CHECK(max_asymmetry(s.a_inv) < 1e-12);

        // quadratic forms agree too
        Rng probe_rng(5);
        const Vec probe = random_feature(probe_rng, dim, 1.0);
        Eigen::VectorXd pe(dim);
        for (int r = 0; r < dim; ++r) pe(r) = probe[static_cast<std::size_t>(r)];
        const double direct_bonus = std::sqrt(pe.dot(direct * pe));
        CHECK(ucb_score(0.0, probe, s).bonus == Catch::Approx(direct_bonus).margin(1e-8));
    }
}

TEST_CASE("score and update reject corrupted or mismatched state") {
    UcbConfig cfg;
    UcbState s = make_ucb_state(cfg, 3);
    const Vec wrong_len = {1.0, 0.0};
    CHECK_THROWS_AS(ucb_score(0.0, wrong_len, s), std::invalid_argument);
    CHECK_THROWS_AS(rank1_update(s, wrong_len), std::invalid_argument);

    // a negative-definite matrix cannot be a covariance inverse
    UcbState bad = make_ucb_state(cfg, 3);
    for (int i = 0; i < 3; ++i) bad.a_inv(i, i) = -1.0;
    const Vec e1 = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(ucb_score(0.0, e1, bad), std::runtime_error);
    CHECK_THROWS_AS(rank1_update(bad, e1), std::runtime_error); // denominator hits zero

    // tiny negative quadratic forms are rounding, not corruption
    UcbState rounding = make_ucb_state(cfg, 3);
    for (int i = 0; i < 3; ++i) rounding.a_inv(i, i) = -1e-12;
    const UcbScore sc = ucb_score(0.25, e1, rounding);
    CHECK(sc.bonus == 0.0);
    CHECK(sc.score == 0.25);
}

TEST_CASE("decisions gate between the greedy and optimistic branches") {
    const Vec mu = {0.5, 0.4};
    const Vec bonus = {0.0, 0.2};

    const Decision open = make_decision(mu, bonus, 0.9, 0.5);
    CHECK(open.used_ucb);
    CHECK(open.safe_action == 0);
    CHECK(open.chosen_action == 1); // 0.6 beats 0.5 once the bonus counts
    CHECK(open.ucb_scores[0] == Catch::Approx(0.5).margin(1e-15));
    CHECK(open.ucb_scores[1] == Catch::Approx(0.6).margin(1e-15));

    const Decision closed = make_decision(mu, bonus, 0.1, 0.5);
    CHECK_FALSE(closed.used_ucb);
    CHECK(closed.chosen_action == 0); // falls back to the greedy pick

    const Decision boundary = make_decision(mu, bonus, 0.5, 0.5);
    CHECK(boundary.used_ucb); // the threshold itself opens the gate

    // ties break to the lowest index on both branches
    const Decision tie = make_decision({0.3, 0.3}, {0.1, 0.1}, 0.9, 0.5);
    CHECK(tie.safe_action == 0);
    CHECK(tie.chosen_action == 0);
}

TEST_CASE("decide reports scores consistent with its choice") {
    const Dataset ds = testsupport::small_synthetic(3, 30, 3, 2, 4);
    const UtilityNetParams p = init_params(4, 2, 3, 13);
    UcbConfig cfg;
    UcbState s = make_ucb_state(cfg);

    // a few updates so the bonus is no longer isotropic
    for (int i = 0; i < 5; ++i) {
        const ForwardTrace t = forward(p, context_of(ds.samples[static_cast<std::size_t>(i)]), i % 3);
        rank1_update(s, augment_feature(t.h_last));
    }

    for (int i = 5; i < 15; ++i) {
        const RoutingContext ctx = context_of(ds.samples[static_cast<std::size_t>(i)]);
        const Decision d = decide(p, s, ctx);
        REQUIRE(d.mu_scores.size() == 3);

        const std::vector<ForwardTrace> traces = forward_all_actions(p, ctx);
        int best_mu = 0, best_ucb = 0;
        for (int a = 0; a < 3; ++a) {
            CHECK(d.mu_scores[static_cast<std::size_t>(a)] == traces[static_cast<std::size_t>(a)].mu);
            CHECK(d.gate_prob == traces[static_cast<std::size_t>(a)].gate_prob);
            const UcbScore sc = ucb_score(traces[static_cast<std::size_t>(a)].mu,
                                          augment_feature(traces[static_cast<std::size_t>(a)].h_last), s);
            CHECK(d.ucb_scores[static_cast<std::size_t>(a)] == Catch::Approx(sc.score).margin(1e-12));
            CHECK(d.bonus_scores[static_cast<std::size_t>(a)] > 0.0);
            if (traces[static_cast<std::size_t>(a)].mu > traces[static_cast<std::size_t>(best_mu)].mu) best_mu = a;
            if (d.ucb_scores[static_cast<std::size_t>(a)] > d.ucb_scores[static_cast<std::size_t>(best_ucb)]) best_ucb = a;
        }
        CHECK(d.safe_action == best_mu);
        CHECK(d.chosen_action == (d.used_ucb ? best_ucb : best_mu));
        CHECK(d.used_ucb == (d.gate_prob >= s.tau_g));
    }
}

TEST_CASE("a zero exploration coefficient reduces to the greedy pick") {
    const Dataset ds = testsupport::small_synthetic(4, 20, 3, 2, 4);
    const UtilityNetParams p = init_params(4, 2, 3, 23);
    UcbConfig cfg;
    cfg.beta = 0.0;
    cfg.tau_g = 0.0; // gate always open, so the UCB branch always runs
    UcbState s = make_ucb_state(cfg);
    for (const Sample& sample : ds.samples) {
        const Decision d = decide(p, s, context_of(sample));
        CHECK(d.used_ucb);
        CHECK(d.chosen_action == d.safe_action);
    }
}

TEST_CASE("rebuilding from the buffer reproduces the sequential state") {
    const Dataset ds = testsupport::small_synthetic(8, 60, 3, 2, 4);
    const UtilityNetParams p = init_params(4, 2, 3, 29);
    UcbConfig cfg;
    cfg.lambda0 = 1.5;

    UcbState sequential = make_ucb_state(cfg);
    std::vector<ReplayRecord> buffer;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        ReplayRecord rec;
        rec.context = context_of(ds.samples[i]);
        rec.action = static_cast<int>(i % 3);
        buffer.push_back(rec);
        rank1_update(sequential, augment_feature(forward(p, rec.context, rec.action).h_last));
    }

    UcbState rebuilt = make_ucb_state(cfg);
    rebuild(rebuilt, p, buffer);
    CHECK(rebuilt.update_count == sequential.update_count);
    double worst = 0.0;
    for (int r = 0; r < kUcbDim; ++r)
        for (int c = 0; c < kUcbDim; ++c)
            worst = std::max(worst, std::fabs(rebuilt.a_inv(r, c) - sequential.a_inv(r, c)));
    CHECK(worst < 1e-8);

    // an empty buffer rebuilds the prior
    UcbState fresh = make_ucb_state(cfg);
    rank1_update(fresh, augment_feature(forward(p, buffer[0].context, 0).h_last));
    rebuild(fresh, p, {});
    CHECK(fresh.update_count == 0);
    for (int r = 0; r < kUcbDim; ++r)
        for (int c = 0; c < kUcbDim; ++c)
            CHECK(fresh.a_inv(r, c) == (r == c ? 1.0 / 1.5 : 0.0));
}
