#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <random>
#include <sstream>

#include "shyc/simulate.hpp"

using namespace shyc;

namespace {

struct SeedEnvGuard {
    SeedEnvGuard() { ::unsetenv(kSeedEnv); }
    ~SeedEnvGuard() { ::unsetenv(kSeedEnv); }
};

SimConfig random_config(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 7);
    SimConfig c;
    const int kind = pick(gen) % 3;
    const int d = 2 + pick(gen) % 4;
    c.space = SpaceSpec(kind - 1, d);
    c.strategy.id = strategy_ids()[static_cast<std::size_t>(pick(gen))];
    c.strategy.k = u(gen) * 3 - 1;
    if (pick(gen) % 2) c.strategy.alpha_override = u(gen) * 6.0;
    if (pick(gen) % 2) c.strategy.eps = 0.1 + 0.6 * u(gen);
    c.rho0 = u(gen) * 3.0;
    if (pick(gen) % 3 == 0) {
        c.x0 = Vec::basis(c.space.ambient_dim(), 0) * (1.0 / 3.0);
        c.y0 = Vec::basis(c.space.ambient_dim(), 1) * std::exp(u(gen));
    }
    c.h = std::ldexp(u(gen), -10);
    c.T = 0.1 + 10.0 * u(gen);
    c.n_paths = 1 + pick(gen) * 1000;
    c.seed = gen();
    c.threads = pick(gen);
    c.record_every = 1 + pick(gen);
    if (pick(gen) % 2) c.csv_path = "out/traj.csv";
    if (pick(gen) % 2) c.json_path = "/tmp/summary.json";
    return c;
}

}  // namespace

TEST(ConfigRoundTrip, RandomConfigsSurviveRenderThenParse) {
    SeedEnvGuard guard;
    std::mt19937_64 gen(21);
    for (int i = 0; i < 500; ++i) {
        const SimConfig c = random_config(gen);
        const std::string text = render_config(c);
        const SimConfig back = parse_config(text);
        ASSERT_EQ(back, c) << text;
        ASSERT_EQ(render_config(back), text);
    }
}

TEST(ConfigRoundTrip, DefaultConfig) {
    SeedEnvGuard guard;
    EXPECT_EQ(parse_config(render_config(SimConfig{})), SimConfig{});
}

TEST(ConfigParse, CommentsBlankLinesAndWhitespace) {
    SeedEnvGuard guard;
    const auto c = parse_config("# run\n\n  space =  sphere:3 \nstrategy=rotation # trailing\nk = 2\npaths=7\n");
    EXPECT_EQ(c.space, SpaceSpec::sphere(3));
    EXPECT_EQ(c.strategy.id, "rotation");
    EXPECT_EQ(c.strategy.k, 2.0);
    EXPECT_EQ(c.n_paths, 7);
}

TEST(ConfigParse, FlagsOverrideFileSettings) {
    SeedEnvGuard guard;
    const auto file = parse_key_values("h = 0.01\npaths = 10\nseed = 5\n");
    const std::map<std::string, std::string> flags{{"paths", "3"}};
    const auto c = apply_settings(apply_settings(SimConfig{}, file), flags);
    EXPECT_EQ(c.n_paths, 3);
    EXPECT_EQ(c.h, 0.01);
    EXPECT_EQ(c.seed, 5u);
}

TEST(ConfigParse, RejectsBadInput) {
    SeedEnvGuard guard;
    EXPECT_THROW(parse_config("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("no equals sign\n"), ConfigError);
    EXPECT_THROW(parse_config("h = fast\n"), ConfigError);
    EXPECT_THROW(parse_config("paths = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("space = torus:2\n"), ConfigError);
    EXPECT_THROW(parse_config("space = sphere\n"), ConfigError);
    EXPECT_THROW(parse_config("space = sphere:1\n"), ConfigError);
    EXPECT_THROW(parse_config("x0 = 1,,2\n"), ConfigError);
}

TEST(ConfigValidate, StructuralErrors) {
    SeedEnvGuard guard;
    SimConfig c;
    c.n_paths = 0;
    EXPECT_THROW(validate(c), ConfigError);
    c = SimConfig{};
    c.h = -1;
    EXPECT_THROW(validate(c), ConfigError);
    c = SimConfig{};
    c.rho0 = 4.0;
    EXPECT_THROW(validate(c), ConfigError);
    c = SimConfig{};
    c.x0 = Vec{1, 0, 0};
    EXPECT_THROW(validate(c), ConfigError);
    c.y0 = Vec{0, 2, 0};
    EXPECT_THROW(validate(c), ConfigError);
    c.y0 = Vec{0, 1, 0};
    EXPECT_NO_THROW(validate(c));
    c = SimConfig{};
    c.strategy.id = "translation";
    EXPECT_THROW(build_strategy(c), ConfigError);
    c.space = SpaceSpec::euclidean(2);
    c.strategy = {"rotation", 1.0, std::nullopt, std::nullopt};
    EXPECT_THROW(build_strategy(c), InfeasibleRateError);
}

TEST(Seed, EnvironmentOverridesBuiltin) {
    SeedEnvGuard guard;
    EXPECT_EQ(default_seed(), kBuiltinSeed);
    ::setenv(kSeedEnv, "12345", 1);
    EXPECT_EQ(default_seed(), 12345u);
    EXPECT_EQ(SimConfig{}.seed, 12345u);
    ::setenv(kSeedEnv, "abc", 1);
    EXPECT_THROW(default_seed(), ConfigError);
}

TEST(Csv, HeaderAndRoundTripNumbers) {
    SeedEnvGuard guard;
    SimConfig c;
    c.strategy.id = "extrinsic-contract-s2";
    c.n_paths = 3;
    c.T = 0.05;
    c.h = 0.01;
    const auto recs = run_simulation(c);
    std::ostringstream out;
    write_csv(out, recs);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,rho,regime,path_id");
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string t, rho, regime, id;
        std::getline(ss, t, ',');
        std::getline(ss, rho, ',');
        std::getline(ss, regime, ',');
        std::getline(ss, id, ',');
        const auto& rec = recs[row / recs[0].t.size()];
        const std::size_t k = row % recs[0].t.size();
        EXPECT_EQ(parse_double(t, "t"), rec.t[k]);
        EXPECT_EQ(parse_double(rho, "rho"), rec.rho[k]);
        EXPECT_EQ(regime, "COUPLED");
        EXPECT_EQ(std::stoul(id), rec.path_id);
        ++row;
    }
    EXPECT_EQ(row, 3 * recs[0].t.size());
    for (const auto& r : recs)
        for (std::size_t i = 1; i < r.t.size(); ++i) EXPECT_GT(r.t[i], r.t[i - 1]);
}

TEST(FormatDouble, ShortestRoundTrip) {
    std::mt19937_64 gen(22);
    for (int i = 0; i < 10000; ++i) {
        double v;
        const std::uint64_t bits = gen();
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        EXPECT_EQ(parse_double(format_double(v), "v"), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
}
