#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tbell/error.hpp"
#include "tbell/inequalities.hpp"
#include "tbell/search.hpp"

using namespace tbell;

namespace {

constexpr double kPi = std::numbers::pi;

TripleConfiguration random_config(RandomStream& rng) {
    TripleConfiguration c;
    for (double& a : c.angles) a = 2 * kPi * rng.uniform();
    return c;
}

double fd_component(Objective kind, TripleConfiguration c, int j, double h) {
    TripleConfiguration up = c, dn = c;
    up.angles[j] += h;
    dn.angles[j] -= h;
    return (objective(kind, up) - objective(kind, dn)) / (2 * h);
}

}  // namespace

TEST(Objective, NamesAndParsing) {
    EXPECT_EQ(objective_name(Objective::eq18), "EQ18");
    EXPECT_EQ(parse_objective("eq16"), Objective::eq16);
    EXPECT_EQ(parse_objective("EQ18"), Objective::eq18);
    EXPECT_THROW(parse_objective("eq17"), Error);
}

TEST(Objective, ReferenceConfigurations) {
    EXPECT_NEAR(objective(Objective::eq16, reference_configuration(Objective::eq16)), std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(objective(Objective::eq18, reference_configuration(Objective::eq18)),
                std::sqrt(2.0) + 0.5, 1e-12);
    TripleConfiguration same{{0.4, 1.0, 0.4, 1.0, 0.4, 1.0}};
    EXPECT_NEAR(objective(Objective::eq16, same), 1.0, 1e-12);
}

TEST(Objective, MatchesClosedForms) {
    RandomStream rng(1);
    for (int i = 0; i < 100; ++i) {
        const TripleConfiguration c = random_config(rng);
        const Directions d = c.directions();
        EXPECT_NEAR(objective(Objective::eq16, c), lhs16(d.a, d.b, d.c), 1e-14);
        EXPECT_NEAR(objective(Objective::eq18, c), lhs18(d.a, d.b, d.c), 1e-14);
    }
}

TEST(Gradient, MatchesFiniteDifferences) {
    RandomStream rng(2);
    for (int i = 0; i < 100; ++i) {
        const TripleConfiguration c = random_config(rng);
        for (Objective kind : {Objective::eq16, Objective::eq18}) {
            const auto g = gradient(kind, c);
            for (int j = 0; j < 6; ++j) {
                const double fd = fd_component(kind, c, j, 1e-5);
                EXPECT_LE(std::abs(g[j] - fd), 1e-6 * std::max(1.0, std::abs(g[j])))
                    << "component " << j;
            }
        }
    }
}

TEST(Gradient, AzimuthalShiftInvariance) {
    RandomStream rng(3);
    for (int i = 0; i < 100; ++i) {
        TripleConfiguration c = random_config(rng);
        for (Objective kind : {Objective::eq16, Objective::eq18}) {
            const auto g = gradient(kind, c);
            EXPECT_NEAR(g[1] + g[3] + g[5], 0.0, 1e-10);
            TripleConfiguration shifted = c;
            const double delta = 2 * kPi * rng.uniform();
            for (int j = 1; j < 6; j += 2) shifted.angles[j] += delta;
            EXPECT_NEAR(objective(kind, shifted), objective(kind, c), 1e-12);
        }
    }
}

TEST(LocalAscent, TraceIsMonotone) {
    RandomStream rng(4);
    SearchConfig cfg;
    for (int i = 0; i < 10; ++i) {
        std::vector<double> trace;
        const TripleConfiguration start = random_config(rng);
        const LocalSearchResult r = local_ascent(Objective::eq18, start, cfg, rng, &trace);
        ASSERT_FALSE(trace.empty());
        for (std::size_t k = 1; k < trace.size(); ++k) ASSERT_GE(trace[k], trace[k - 1]);
        EXPECT_GE(r.value, objective(Objective::eq18, start));
        EXPECT_NEAR(r.value, objective(Objective::eq18, r.best), 1e-15);
    }
}

TEST(LocalAscent, BudgetExhaustionIsReported) {
    RandomStream rng(5);
    SearchConfig cfg;
    cfg.max_iterations = 2;
    const LocalSearchResult r = local_ascent(Objective::eq16, random_config(rng), cfg, rng);
    EXPECT_TRUE(r.budget_exhausted);
    EXPECT_LE(r.iterations, 2u);
}

TEST(Maximize, ReachesGlobalMaxima) {
    SearchConfig cfg;
    cfg.objective = Objective::eq16;
    const SearchResult r16 = maximize(cfg);
    EXPECT_GE(r16.value, 1.49);
    EXPECT_NEAR(r16.value, 1.5, 1e-9);
    EXPECT_LE(r16.gradient_norm, 1e-6);
    cfg.objective = Objective::eq18;
    const SearchResult r18 = maximize(cfg);
    EXPECT_GE(r18.value, 1.99);
    EXPECT_NEAR(r18.value, 7.0 / 3.0, 1e-9);
    EXPECT_LE(r18.gradient_norm, 1e-6);
    EXPECT_EQ(r18.n_starts, 20u);
}

TEST(Maximize, SingleStartFromReferencePoint) {
    SearchConfig cfg;
    cfg.n_starts = 1;
    cfg.starts = {reference_configuration(Objective::eq16)};
    EXPECT_GE(maximize(cfg).value, std::sqrt(2.0));
}

TEST(Maximize, DeterministicAcrossWorkers) {
    SearchConfig cfg;
    cfg.objective = Objective::eq18;
    cfg.seed = 99;
    cfg.workers = 1;
    const SearchResult one = maximize(cfg);
    cfg.workers = 8;
    const SearchResult eight = maximize(cfg);
    EXPECT_EQ(one.best, eight.best);
    EXPECT_EQ(one.value, eight.value);
    EXPECT_EQ(one.iterations, eight.iterations);
}

TEST(Maximize, Validation) {
    SearchConfig cfg;
    cfg.n_starts = 0;
    EXPECT_THROW(maximize(cfg), Error);
    cfg = SearchConfig{};
    cfg.step_tolerance = 0;
    EXPECT_THROW(maximize(cfg), Error);
    cfg = SearchConfig{};
    cfg.starts.resize(21);
    EXPECT_THROW(maximize(cfg), Error);
}

TEST(GridOracle, OneDegreeValues) {
    const double deg = kPi / 180;
    const GridResult g16 = grid_oracle(Objective::eq16, deg);
    EXPECT_NEAR(g16.value, 1.5, 5e-4);
    EXPECT_NEAR(g16.value, objective(Objective::eq16, g16.best), 1e-15);
    const GridResult g18 = grid_oracle(Objective::eq18, deg);
    EXPECT_NEAR(g18.value, 7.0 / 3.0, 5e-4);
    EXPECT_GE(g18.value, 2.0);
    EXPECT_GT(g18.evaluations, 0u);
}

TEST(GridOracle, ContainsReferencePoints) {
    // A 45 degree grid contains both reference configurations.
    const double res = kPi / 4;
    EXPECT_GE(grid_oracle(Objective::eq16, res).value, std::sqrt(2.0) - 1e-12);
    EXPECT_GE(grid_oracle(Objective::eq18, res).value, std::sqrt(2.0) + 0.5 - 1e-12);
}

TEST(GridOracle, RejectsFineResolution) {
    EXPECT_THROW(grid_oracle(Objective::eq16, 0.001), Error);
    EXPECT_THROW(grid_oracle(Objective::eq16, -1.0), Error);
}

TEST(GlobalMaximum, AnalyticValues) {
    EXPECT_EQ(global_maximum(Objective::eq16), 1.5);
    EXPECT_DOUBLE_EQ(global_maximum(Objective::eq18), 7.0 / 3.0);
}

namespace {

// Rodrigues rotation of v about unit axis k by angle t.
Vec3 rotate(const Vec3& v, const Vec3& k, double t) {
    const Vec3 kxv = cross3(k, v);
    const double kv = dot3(k, v), c = std::cos(t), s = std::sin(t);
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = v[i] * c + kxv[i] * s + k[i] * kv * (1 - c);
    return out;
}

TripleConfiguration to_angles(const Directions& d) {
    TripleConfiguration c;
    int j = 0;
    for (const Direction* x : {&d.a, &d.b, &d.c}) {
        c.angles[j++] = std::acos(std::clamp(x->z(), -1.0, 1.0));
        c.angles[j++] = std::atan2(x->y(), x->x());
    }
    return c;
}

}  // namespace

TEST(Objective, InvariantUnderCommonRotation) {
    RandomStream rng(20);
    for (int i = 0; i < 200; ++i) {
        const TripleConfiguration c = random_config(rng);
        const Directions d = c.directions();
        const Vec3 axis = random_direction(rng).vec();
        const double t = 2 * kPi * rng.uniform();
        const Directions r{Direction::from_vec(rotate(d.a.vec(), axis, t)),
                           Direction::from_vec(rotate(d.b.vec(), axis, t)),
                           Direction::from_vec(rotate(d.c.vec(), axis, t))};
        for (Objective kind : {Objective::eq16, Objective::eq18})
            EXPECT_NEAR(objective(kind, to_angles(r)), objective(kind, c), 1e-12);
    }
}

TEST(Maximize, ConsistentWithGridAndAnalyticBound) {
    const double deg = kPi / 180;
    for (Objective kind : {Objective::eq16, Objective::eq18}) {
        SearchConfig cfg;
        cfg.objective = kind;
        const double best = maximize(cfg).value;
        EXPECT_GE(best, grid_oracle(kind, deg).value - 1e-3);
        EXPECT_LE(best, global_maximum(kind) + 1e-9);
    }
}

TEST(Maximize, ReferenceAnsatzOptimumOverAAlone) {
    // With b and c fixed and orthogonal, the best a is along b - c with value sqrt 2.
    TripleConfiguration c{{1.0, 2.0, kPi / 2, 0.0, 0.0, 0.0}};  // b = x, c = z
    double step = 0.5;
    double value = objective(Objective::eq16, c);
    for (int it = 0; it < 100'000 && step > 1e-14; ++it) {
        const auto g = gradient(Objective::eq16, c);
        TripleConfiguration next = c;
        next.angles[0] += step * g[0];
        next.angles[1] += step * g[1];
        const double v = objective(Objective::eq16, next);
        if (v > value) {
            c = next;
            value = v;
            step = std::min(step * 2, 0.5);
        } else {
            step /= 2;
        }
    }
    EXPECT_NEAR(value, std::sqrt(2.0), 1e-9);
    const Directions d = c.directions();
    const double r = 1 / std::sqrt(2.0);
    EXPECT_NEAR(d.a.x(), r, 1e-4);
    EXPECT_NEAR(d.a.z(), -r, 1e-4);
}
