#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shyc/couplings.hpp"
#include "shyc/simulate.hpp"
#include "shyc/verify.hpp"

using namespace shyc;

namespace {

constexpr double pi = std::numbers::pi;

StepNoise zero_noise(int dim) { return {Vec(dim), Vec(dim)}; }

StrategySpec spec_of(std::string id, double k = 0.0) {
    StrategySpec s;
    s.id = std::move(id);
    s.k = k;
    return s;
}

}  // namespace

TEST(Translation, DistanceBitIdenticalAndZeroNoise) {
    const auto s = SpaceSpec::euclidean(3);
    const TranslationCoupling c(s);
    auto st = c.start(Vec{0.1, 0.2, 0.3}, Vec{1.5, -2.0, 0.25});
    const double d0 = c.distance(st);
    const auto frozen = st;
    c.step(st, zero_noise(3), 0.01);
    EXPECT_EQ(st.x, frozen.x);
    EXPECT_EQ(st.y, frozen.y);
    NoiseStream rng(1, 0);
    for (int i = 0; i < 1000; ++i) {
        c.step(st, draw_noise(rng, 3), 1e-3);
        ASSERT_LT(std::abs(c.distance(st) - d0), 1e-14);
    }
    EXPECT_THROW(TranslationCoupling(SpaceSpec::sphere(2)), DomainError);
}

TEST(Mirror, MeetsOnEveryPathAndStaysGlued) {
    const auto s2 = SpaceSpec::sphere(2);
    const MirrorCouplingS2 c(s2);
    const auto start = canonical_pair(s2, 1.0);
    const auto initial = c.start(start.x, start.y);
    const double h = 1e-3;
    const auto met = parallel_map(1000L, 0, [&](long p) {
        NoiseStream rng(2, static_cast<std::uint64_t>(p));
        CouplingState st = initial;
        long glued_at = -1;
        simulate_path(c, st, h, std::lround(20.0 / h), rng, [&](long i, const CouplingState& cs) {
            if (cs.met && glued_at < 0) glued_at = i;
            return !(glued_at >= 0 && i > glued_at + 20);
        });
        return st.met && st.x == st.y;
    });
    for (bool m : met) EXPECT_TRUE(m);
}

TEST(Extrinsic, CoincidentAndAntipodalStarts) {
    const auto s2 = SpaceSpec::sphere(2);
    const ExtrinsicCouplingS2 contract(s2, false), expand(s2, true);
    const Vec x = Vec{0, 0.6, 0.8};
    auto a = contract.start(x, x);
    auto b = expand.start(x, -x);
    NoiseStream rng(3, 0);
    for (int i = 0; i < 500; ++i) {
        const auto n = draw_noise(rng, 3);
        contract.step(a, n, 1e-3);
        expand.step(b, n, 1e-3);
        ASSERT_LT((a.x - a.y).norm(), 1e-14);
        ASSERT_LT((b.x + b.y).norm(), 1e-14);
    }
}

TEST(Extrinsic, ExpandEqualsNegatedContractFromReflectedStart) {
    const auto s2 = SpaceSpec::sphere(2);
    const ExtrinsicCouplingS2 contract(s2, false), expand(s2, true);
    const auto p = canonical_pair(s2, 1.2);
    auto a = expand.start(p.x, p.y);
    auto b = contract.start(p.x, -p.y);
    NoiseStream rng(4, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto n = draw_noise(rng, 3);
        expand.step(a, n, 1e-3);
        contract.step(b, n, 1e-3);
        ASSERT_LT((a.x - b.x).norm(), 1e-15);
        ASSERT_LT((a.y + b.y).norm(), 1e-12);
    }
}

TEST(FixedDistance, DistanceNearlyConstantOverShortRun) {
    const auto s2 = SpaceSpec::sphere(2);
    const FixedDistanceCouplingS2 c(s2);
    auto st = c.start(Vec{1, 0, 0}, Vec{0, 1, 0});
    NoiseStream rng(5, 0);
    for (int i = 0; i < 100; ++i) c.step(st, draw_noise(rng, 3), 1e-5);
    EXPECT_NEAR(c.distance(st), pi / 2, 5e-3);
    EXPECT_THROW((void)c.start(Vec{1, 0, 0}, Vec{-1, 0, 0}), DegeneracyError);
}

TEST(Rotation, FeasibilityRules) {
    EXPECT_THROW(RotationCoupling(SpaceSpec::euclidean(2), RateSpec{0.1}), InfeasibleRateError);
    EXPECT_THROW(RotationCoupling(SpaceSpec::hyperbolic(3), RateSpec{0.0}), InfeasibleRateError);
    EXPECT_THROW(RotationCoupling(SpaceSpec::hyperbolic(3), RateSpec{2.0}), InfeasibleRateError);
    EXPECT_NO_THROW(RotationCoupling(SpaceSpec::euclidean(2), RateSpec{0.0}));
    EXPECT_NO_THROW(RotationCoupling(SpaceSpec::euclidean(2), RateSpec{5.0}, pi));
    for (int d : {2, 3, 5}) {
        const auto s = SpaceSpec::sphere(d);
        const RotationCoupling c(s, RateSpec{static_cast<double>(d - 1)});
        for (double rho = 0.05; rho < pi - 0.05; rho += 0.1) EXPECT_TRUE(rate_feasible(s, d - 1.0, rho));
        const auto p = canonical_pair(s, 2.0);
        EXPECT_NO_THROW((void)c.start(p.x, p.y));
    }
    // beyond 2 (d-1) tan(rho/2) / rho the rate is infeasible at that rho
    const auto s2 = SpaceSpec::sphere(2);
    const double bound = 2.0 * std::tan(0.5) / 1.0;
    EXPECT_TRUE(rate_feasible(s2, bound * 0.999, 1.0));
    EXPECT_FALSE(rate_feasible(s2, bound * 1.001, 1.0));
    const RotationCoupling too_fast(s2, RateSpec{bound * 1.01});
    const auto p = canonical_pair(s2, 1.0);
    EXPECT_THROW((void)too_fast.start(p.x, p.y), InfeasibleRateError);
}

TEST(Rotation, ZeroRateOnSphereRotatesByRho) {
    const auto s2 = SpaceSpec::sphere(3);
    const RotationCoupling c(s2, RateSpec{0.0});
    for (double rho : {0.3, 1.0, 2.5}) {
        EXPECT_NEAR(c.alpha_at(rho), rho, 1e-12);
        EXPECT_NEAR(rotation_drift(s2, c.alpha_at(rho), rho), 0.0, 1e-12);
    }
}

TEST(Rotation, DriftClosedForms) {
    for (int d : {2, 3, 5})
        for (double rho : {0.2, 1.0, 2.4}) {
            EXPECT_NEAR(rotation_drift(SpaceSpec::sphere(d), 0.0, rho), -(d - 1) * std::tan(rho / 2), 1e-12);
            EXPECT_NEAR(rotation_drift(SpaceSpec::euclidean(d), pi, rho), 2.0 * (d - 1) / rho, 1e-12);
            EXPECT_NEAR(rotation_drift(SpaceSpec::euclidean(d), 0.0, rho), 0.0, 1e-15);
        }
}

TEST(Rotation, ZeroMartingaleAndIsometricNoiseMap) {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> nd;
    for (const auto& s : {SpaceSpec::sphere(2), SpaceSpec::sphere(3), SpaceSpec::sphere(4), SpaceSpec::euclidean(3),
                          SpaceSpec::hyperbolic(2), SpaceSpec::hyperbolic(5)}) {
        const RotationCoupling c(s, RateSpec{0.0}, 0.7);
        const auto p = canonical_pair(s, 0.9);
        auto st = c.start(p.x, p.y);
        st.geodesic = geodesic(s, st.x, st.y);
        const Mat o = c.noise_map(0.7);
        const int n = c.noise_dim();
        EXPECT_EQ(n, s.dim % 2 ? s.dim : s.dim + 1);
        EXPECT_LT(max_abs_diff(o * o.transpose(), Mat::identity(n)), 1e-12);
        for (int trial = 0; trial < 200; ++trial) {
            Vec g(n);
            for (int i = 0; i < n; ++i) g[i] = nd(gen);
            const auto inc = c.increments(st, g, 0.7);
            const double first_variation = s.inner(inc.dy, st.geodesic.end_dir) - s.inner(inc.dx, st.geodesic.start_dir);
            EXPECT_LT(std::abs(first_variation), 1e-12);
        }
    }
}

// One-step mean of the distance change matches (d-1)(gc - cos a)/gs.
TEST(Rotation, EmpiricalDriftMatchesFormula) {
    for (const auto& s : {SpaceSpec::sphere(2), SpaceSpec::sphere(3), SpaceSpec::euclidean(2), SpaceSpec::hyperbolic(3)})
        for (double alpha : {0.0, pi / 2, pi}) {
            const RotationCoupling c(s, RateSpec{0.0}, alpha);
            const double rho = 1.0, h = 1e-4;
            const auto p = canonical_pair(s, rho);
            const auto initial = c.start(p.x, p.y);
            NoiseStream rng(7, 0);
            RunningStats stats;
            for (int i = 0; i < 100000; ++i) {
                auto st = initial;
                c.step(st, draw_noise(rng, c.noise_dim()), h);
                stats.add((c.distance(st) - rho) / h);
            }
            const double want = rotation_drift(s, alpha, rho);
            EXPECT_LT(std::abs(stats.mean - want), 3.0 * stats.stderr_mean() + 0.02 * std::max(1.0, std::abs(want)))
                << s.name() << " alpha=" << alpha;
        }
}

TEST(Rotation, FlatPerverseSquaredDistanceGrowsLinearly) {
    const auto s = SpaceSpec::euclidean(2);
    const RotationCoupling c(s, RateSpec{0.0}, pi);
    const auto p = canonical_pair(s, 1.0);
    const auto initial = c.start(p.x, p.y);
    const auto sq = parallel_map(2000L, 0, [&](long path) {
        NoiseStream rng(8, static_cast<std::uint64_t>(path));
        auto st = initial;
        for (int i = 0; i < 1000; ++i) c.step(st, draw_noise(rng, c.noise_dim()), 1e-3);
        const double r = c.distance(st);
        return r * r;
    });
    RunningStats stats;
    for (double v : sq) stats.add(v);
    EXPECT_LT(std::abs(z_score(stats, 1.0 + 4.0)), 3.0);
}

TEST(SO3Flow, DistanceConstantAndCoincidentPaths) {
    const auto s2 = SpaceSpec::sphere(2);
    const SO3FlowCoupling c(s2);
    const auto p = canonical_pair(s2, 1.3);
    auto st = c.start(p.x, p.y);
    auto same = c.start(p.x, p.x);
    NoiseStream rng(9, 0);
    for (int i = 0; i < 10000; ++i) {
        const auto n = draw_noise(rng, 3);
        c.step(st, n, 1e-3);
        c.step(same, n, 1e-3);
        ASSERT_LT(std::abs(c.distance(st) - 1.3), 1e-12);
        ASSERT_EQ(same.x, same.y);
    }
}

TEST(Patched, AntipodalStartIsIndependent) {
    const auto s2 = SpaceSpec::sphere(2);
    const auto c = make_strategy(s2, {"extrinsic-expand-s2", 0.0, std::nullopt, 0.4});
    const auto st = c->start(Vec{1, 0, 0}, Vec{-1, 0, 0});
    EXPECT_EQ(st.regime, Regime::Independent);
}

TEST(Patched, NeverBeyondCutThresholdWhileCoupledAndStaysShy) {
    const auto s2 = SpaceSpec::sphere(2);
    const double eps = 0.4, rho0 = 0.5;
    for (const StrategySpec& spec : {StrategySpec{"extrinsic-expand-s2", 0.0, std::nullopt, eps},
                                     StrategySpec{"rotation", 0.0, pi, eps}}) {
        const auto c = make_strategy(s2, spec);
        const auto p = canonical_pair(s2, rho0);
        const auto initial = c->start(p.x, p.y);
        bool saw_independent = false;
        for (long path = 0; path < 50; ++path) {
            NoiseStream rng(10, static_cast<std::uint64_t>(path));
            auto st = initial;
            simulate_path(*c, st, 1e-3, 5000, rng, [&](long, const CouplingState& cs) {
                const double rho = c->distance(cs);
                if (cs.regime == Regime::Coupled) EXPECT_LE(rho, pi - eps);
                else saw_independent = true;
                EXPECT_GE(rho, std::min(rho0, eps / 4));
                return true;
            });
        }
        EXPECT_TRUE(saw_independent) << spec.id;
    }
}

TEST(Patched, DiagonalZoneSwitchesAndRecouples) {
    // contracting coupling started inside the diagonal zone runs independently
    const auto s2 = SpaceSpec::sphere(2);
    const auto c = make_strategy(s2, {"extrinsic-contract-s2", 0.0, std::nullopt, 0.4});
    const auto p = canonical_pair(s2, 0.05);
    auto st = c->start(p.x, p.y);
    EXPECT_EQ(st.regime, Regime::Independent);
    NoiseStream rng(11, 0);
    bool recoupled = false;
    for (int i = 0; i < 20000 && !recoupled; ++i) {
        c->step(st, draw_noise(rng, 3), 1e-3);
        recoupled = st.regime == Regime::Coupled;
    }
    EXPECT_TRUE(recoupled);
    EXPECT_GT(c->distance(st), 0.2);
}

TEST(Factory, IdsAndPreconditions) {
    for (const auto& id : strategy_ids()) {
        const SpaceSpec s = id == "translation" ? SpaceSpec::euclidean(2) : SpaceSpec::sphere(2);
        const auto c = make_strategy(s, spec_of(id));
        EXPECT_EQ(c->id(), id);
    }
    EXPECT_THROW(make_strategy(SpaceSpec::sphere(3), spec_of("fixed-s2")), DomainError);
    EXPECT_THROW(make_strategy(SpaceSpec::sphere(2), spec_of("nope")), DomainError);
    EXPECT_THROW(make_strategy(SpaceSpec::euclidean(2), spec_of("rotation", 1.0)), InfeasibleRateError);
    EXPECT_THROW(make_strategy(SpaceSpec::sphere(2), {"rotation", 0.0, std::nullopt, 1.0}), DomainError);
}

TEST(Determinism, SameSeedSameTrajectoryBits) {
    SimConfig cfg;
    cfg.strategy = spec_of("rotation", 1.0);
    cfg.space = SpaceSpec::sphere(3);
    cfg.n_paths = 8;
    cfg.T = 0.2;
    cfg.threads = 3;
    const auto a = run_simulation(cfg);
    cfg.threads = 1;
    const auto b = run_simulation(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].rho, b[i].rho);
}
