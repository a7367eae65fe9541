#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shyc/verify.hpp"

using namespace shyc;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<DistanceLaw> law_zoo() {
    std::vector<DistanceLaw> out;
    for (int r : {-1, 0, 1})
        for (int d : {2, 3, 5})
            for (double rho0 : {0.3, 1.0, 2.0}) {
                out.push_back({LawId::Synchronous, r, d, 0.0, rho0});
                out.push_back({LawId::Perverse, r, d, 0.0, rho0});
                out.push_back({LawId::Constant, r, d, 0.0, rho0});
                out.push_back({LawId::Exponential, r, d, 0.7, rho0});
            }
    for (double rho0 : {0.3, 1.0, 2.0}) {
        out.push_back({LawId::ExtrinsicContract, 1, 2, 0.0, rho0});
        out.push_back({LawId::ExtrinsicExpand, 1, 2, 0.0, rho0});
    }
    return out;
}

}  // namespace

TEST(Laws, SphereSynchronousExample) {
    const DistanceLaw law{LawId::Synchronous, 1, 2, 0.0, pi / 2};
    const double t = 2.0 * std::log(2.0);
    const double want = 2.0 * std::asin(std::sqrt(2.0) / 4.0);
    EXPECT_NEAR(want, 0.72273, 5e-6);
    EXPECT_NEAR(law_eval(law, t), want, 1e-14);
    const double ode = law_ode_oracle(law, t);
    EXPECT_LT(std::abs(ode - want) / want, 1e-10);
}

TEST(Laws, FlatPerverseExample) {
    const DistanceLaw law{LawId::Perverse, 0, 2, 0.0, 1.0};
    EXPECT_NEAR(law_eval(law, 1.0), std::sqrt(5.0), 1e-15);
    EXPECT_LT(std::abs(law_ode_oracle(law, 1.0) - std::sqrt(5.0)), 1e-10);
}

TEST(Laws, StartAtInitialValue) {
    for (const auto& law : law_zoo()) EXPECT_NEAR(law_eval(law, 0.0), law.initial(), 1e-15) << law.name();
}

TEST(Laws, AgreeWithIndependentOdeIntegration) {
    for (const auto& law : law_zoo())
        for (double t : {0.25, 1.0, 3.0}) {
            const double closed = law_eval(law, t);
            const double ode = law_ode_oracle(law, t);
            EXPECT_LT(std::abs(closed - ode) / std::max(1e-3, std::abs(closed)), 1e-8)
                << law.name() << " r=" << law.r << " d=" << law.d << " rho0=" << law.rho0 << " t=" << t;
        }
}

TEST(Laws, MonotoneWhereExpected) {
    for (const auto& law : law_zoo()) {
        double prev = law_eval(law, 0.0);
        for (int i = 1; i <= 30; ++i) {
            const double v = law_eval(law, 0.1 * i);
            switch (law.id) {
                case LawId::Synchronous:
                    if (law.r > 0) {
                        EXPECT_LT(v, prev);
                    } else if (law.r < 0) {
                        EXPECT_GT(v, prev);
                    }
                    break;
                case LawId::Perverse:
                case LawId::ExtrinsicExpand: EXPECT_GT(v, prev); break;
                case LawId::Exponential:
                case LawId::ExtrinsicContract: EXPECT_LT(v, prev); break;
                case LawId::Constant: EXPECT_EQ(v, prev); break;
            }
            prev = v;
        }
    }
}

TEST(OrderFit, ExactPowers) {
    const std::vector<double> hs{4e-3, 2e-3, 1e-3, 5e-4};
    std::vector<std::pair<double, double>> lin, root;
    for (double h : hs) {
        lin.emplace_back(h, h);
        root.emplace_back(h, std::sqrt(h));
    }
    EXPECT_NEAR(convergence_order_fit(lin), 1.0, 1e-12);
    EXPECT_NEAR(convergence_order_fit(root), 0.5, 1e-12);
}

TEST(OrderFit, NoisySyntheticSlopeRecovered) {
    std::mt19937_64 gen(12);
    std::normal_distribution<double> noise(0.0, 0.03);
    for (double slope : {0.5, 1.0, 1.5}) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 8; ++i) {
            const double h = 1e-2 * std::pow(0.5, i);
            pts.emplace_back(h, 3.0 * std::pow(h, slope) * std::exp(noise(gen)));
        }
        EXPECT_NEAR(convergence_order_fit(pts), slope, 0.1);
    }
}

TEST(OrderFit, Preconditions) {
    EXPECT_THROW(convergence_order_fit({{1e-3, 1.0}, {2e-3, 2.0}}), DomainError);
    EXPECT_THROW(convergence_order_fit({{1e-3, 1.0}, {1e-3, 2.0}, {1e-3, 3.0}}), DomainError);
}

TEST(LawCheck, TranslationIsExact) {
    LawCheckConfig c;
    c.space = SpaceSpec::euclidean(2);
    c.strategy.id = "translation";
    c.law = {LawId::Constant, 0, 2, 0.0, 1.0};
    c.n_paths = 20;
    const auto rep = distance_law_check(c);
    for (double e : rep.sup_err) EXPECT_LT(e, 1e-14);
    EXPECT_TRUE(rep.pass);
    EXPECT_FALSE(rep.fitted_order.has_value());
}

TEST(LawCheck, MismatchRejected) {
    LawCheckConfig c;
    c.space = SpaceSpec::sphere(3);
    c.law = {LawId::Synchronous, 1, 2, 0.0, 1.0};
    EXPECT_THROW(distance_law_check(c), DomainError);
    c.space = SpaceSpec::sphere(3);
    c.law = {LawId::ExtrinsicContract, 1, 3, 0.0, 1.0};
    EXPECT_THROW(distance_law_check(c), DomainError);
}

TEST(LawCheck, SeedDeterministicReportBytes) {
    LawCheckConfig c;
    c.strategy.id = "extrinsic-contract-s2";
    c.law = {LawId::ExtrinsicContract, 1, 2, 0.0, 1.0};
    c.h_ladder = {8e-3, 4e-3, 2e-3};
    c.n_paths = 16;
    c.T = 0.5;
    c.threads = 4;
    const auto a = distance_law_check(c).to_json().dump();
    c.threads = 1;
    const auto b = distance_law_check(c).to_json().dump();
    EXPECT_EQ(a, b);
}

TEST(ReportJson, SchemaKeysInOrder) {
    Report r;
    r.strategy = "s";
    r.law = "l";
    r.n_paths = 3;
    r.h_ladder = {0.1};
    r.sup_err = {std::numeric_limits<double>::infinity()};
    r.z_scores = {1.5};
    const auto j = r.to_json();
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    const std::vector<std::string> want{"strategy", "law", "n_paths", "h_ladder", "sup_err", "fitted_order", "z_scores", "pass"};
    EXPECT_EQ(keys, want);
    EXPECT_TRUE(j["sup_err"][0].is_null());
    EXPECT_TRUE(j["fitted_order"].is_null());
}

TEST(Marginals, IndependentPassesAndBrokenFails) {
    MarginalConfig c;
    c.n_paths = 10000;
    c.h = 2e-3;
    const auto s2 = SpaceSpec::sphere(2);
    const auto pair = canonical_pair(s2, 1.0);
    const IndependentCoupling indep(s2);
    const auto [x, y] = marginal_check(indep, pair, c);
    EXPECT_TRUE(x.pass);
    EXPECT_TRUE(y.pass);

    const BrokenRotationCoupling broken(s2, pi / 2);
    const auto yb = marginal_check(broken, Coordinate::Y, pair, c);
    double worst = 0.0;
    for (double z : yb.z_scores) worst = std::max(worst, std::abs(z));
    EXPECT_GT(worst, 5.0);
    EXPECT_FALSE(yb.pass);
}

// Comparison oracle: a plain Stroock ensemble started at x0 gives the
// same empirical means as the X coordinate of the so3 flow, within CI.
TEST(Marginals, SO3FlowMatchesStroockEnsemble) {
    const auto s2 = SpaceSpec::sphere(2);
    const auto pair = canonical_pair(s2, 1.0);
    MarginalConfig c;
    c.n_paths = 10000;
    c.h = 2e-3;
    c.times = {0.5};
    const Vec v = default_functionals(s2, pair.x, pair.y)[1];
    c.functionals = {v};
    const SO3FlowCoupling flow(s2);
    const auto rep = marginal_check(flow, Coordinate::X, pair, c);
    EXPECT_TRUE(rep.pass);

    const long steps = std::lround(0.5 / c.h);
    const auto ends = parallel_map(c.n_paths, 0, [&](long p) {
        NoiseStream rng(99, static_cast<std::uint64_t>(p));
        Vec x = pair.x;
        for (long i = 0; i < steps; ++i) x = stroock_step(x, rng.normals(3), c.h);
        return v.dot(x);
    });
    RunningStats oracle;
    for (double e : ends) oracle.add(e);
    const double flow_mean = rep.details["rows"][0]["mean"].get<double>();
    const double flow_se = rep.details["rows"][0]["se"].get<double>();
    const double z = (flow_mean - oracle.mean) / std::hypot(flow_se, oracle.stderr_mean());
    EXPECT_LT(std::abs(z), 3.5);
}

TEST(DriftIdentity, ClosedFormRows) {
    const std::vector<double> rhos{0.3, 1.0, 2.0};
    for (int d : {2, 3, 5}) {
        for (const auto& row : drift_identity_check(1, d, {0.0}, rhos))
            EXPECT_NEAR(row.index_half_sum, -(d - 1) * std::tan(row.rho / 2), 1e-6);
        for (const auto& row : drift_identity_check(0, d, {pi}, rhos))
            EXPECT_NEAR(row.index_half_sum, 2.0 * (d - 1) / row.rho, 1e-6);
    }
}

TEST(DriftIdentity, GridWithinTolerance) {
    std::vector<double> alphas;
    for (int i = 0; i <= 4; ++i) alphas.push_back(i * pi / 4);
    for (int r : {-1, 0, 1})
        for (int d : {2, 3, 5})
            for (const auto& row : drift_identity_check(r, d, alphas, {0.1, 0.7, 1.6, 2.5}))
                EXPECT_LT(row.rel_err, 1e-6) << "r=" << r << " d=" << d << " alpha=" << row.alpha << " rho=" << row.rho;
}

TEST(MaxPrinciple, GradientNormMatchesFiniteDifferences) {
    const auto s2 = SpaceSpec::sphere(2);
    for (int n : {1, 2, 3})
        for (double theta : {0.1, 0.5, 0.9}) {
            const SpacePoint x = polar_point(theta, 0.4);
            const Vec e_theta{std::cos(theta) * std::cos(0.4), std::cos(theta) * std::sin(0.4), -std::sin(theta)};
            const Vec e_phi{-std::sin(0.4), std::cos(0.4), 0.0};
            const double dd = 1e-5;
            auto deriv = [&](const Vec& e) {
                return (cap_harmonic(geodesic_point(s2, x, e, dd), n) - cap_harmonic(geodesic_point(s2, x, e, -dd), n)) / (2 * dd);
            };
            EXPECT_NEAR(std::hypot(deriv(e_theta), deriv(e_phi)), cap_harmonic_grad_norm(theta, n), 1e-7);
        }
    // smallest at the centre for n = 1, growing toward the boundary
    EXPECT_NEAR(cap_harmonic_grad_norm(0.0, 1), 0.5, 1e-15);
    EXPECT_LT(cap_harmonic_grad_norm(0.2, 1), cap_harmonic_grad_norm(pi / 3, 1));
}

TEST(MaxPrinciple, HarmonicOnTheCap) {
    // spherical Laplacian of u by the ambient formula: tr(P Hess P) - 2 x.grad
    for (int n : {1, 2, 3}) {
        const SpacePoint x = polar_point(0.6, 1.1);
        const double dd = 1e-3;
        double lap = 0.0;
        const auto frame = tangent_frame(SpaceSpec::sphere(2), x);
        for (const auto& e : frame) {
            const double up = cap_harmonic(geodesic_point(SpaceSpec::sphere(2), x, e, dd), n);
            const double um = cap_harmonic(geodesic_point(SpaceSpec::sphere(2), x, e, -dd), n);
            lap += (up - 2.0 * cap_harmonic(x, n) + um) / (dd * dd);
        }
        EXPECT_NEAR(lap, 0.0, 1e-5);
    }
}

TEST(MaxPrinciple, ConstantFunctionAndSmallRun) {
    MaxPrincipleConfig c;
    c.harmonic = 0;
    c.n_paths = 200;
    c.h = 4e-3;
    for (const auto& row : max_principle_demo(c)) {
        EXPECT_EQ(row.grad_estimate, 0.0);
        EXPECT_EQ(row.grad_exact, 0.0);
        EXPECT_TRUE(row.pass);
    }
    c.harmonic = 1;
    c.n_paths = 2000;
    for (const auto& row : max_principle_demo(c)) {
        EXPECT_LT(std::abs(row.martingale_z), 4.0);
        EXPECT_NEAR(row.grad_estimate, row.grad_exact, 4.0 * row.grad_se + 0.02);
    }
    c.cap_angle = pi / 2;
    EXPECT_THROW(max_principle_demo(c), DomainError);
}
