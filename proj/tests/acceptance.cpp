// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "tbell/config.hpp"
#include "tbell/inequalities.hpp"
#include "tbell/search.hpp"
#include "tbell/tbell.h"

using namespace tbell;

namespace {

constexpr Outcome P = Outcome::plus;
constexpr Outcome M = Outcome::minus;
constexpr Setting A = Setting::A;
constexpr Setting B = Setting::B;
constexpr Setting C = Setting::C;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Direction unit(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    return Direction::from_xyz(x / n, y / n, z / n);
}

Directions random_directions(RandomStream& rng) {
    return {random_direction(rng), random_direction(rng), random_direction(rng)};
}

TripleDistribution random_distribution(RandomStream& rng) {
    std::array<double, 8> w;
    double sum = 0.0;
    for (double& x : w) sum += (x = -std::log(1.0 - rng.uniform()));
    for (double& x : w) x /= sum;
    return TripleDistribution(w);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict closed_form_values() {
    const double v16 = lhs16(unit(1, 0, -1), unit(1, 0, 0), unit(0, 0, 1));
    const double v18 = lhs18(unit(0, 0, 1), unit(1, 0, 1), unit(1, 0, 0));
    const double e16 = std::abs(v16 - std::sqrt(2.0)), e18 = std::abs(v18 - (std::sqrt(2.0) + 0.5));
    return {e16 <= 1e-12 && e18 <= 1e-12,
            fmt("lhs16=%.15f (err %.1e), lhs18=%.15f (err %.1e)", v16, e16, v18, e18)};
}

Verdict state_independence() {
    RandomStream rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const PureState st = random_state(rng);
        const Direction x = random_direction(rng), y = random_direction(rng);
        double e = 0.0;
        for (Outcome sx : kOutcomes)
            for (Outcome sy : kOutcomes) e += sign(sx) * sign(sy) * quantum_pair_prob(st, x, sx, y, sy);
        worst = std::max(worst, std::abs(e - dot(x, y)));
    }
    return {worst <= 1e-12, fmt("1000 states, max |E - x.y| = %.2e", worst)};
}

Verdict quantum_monte_carlo() {
    const auto t0 = std::chrono::steady_clock::now();
    RandomStream rng(3);
    int comparisons = 0, exceed = 0;
    for (int k = 0; k < 20; ++k) {
        ProtocolConfig p;
        p.n_runs = 1'000'000;
        p.seed = 1000 + k;
        p.initial_state = random_state(rng);
        p.directions = random_directions(rng);
        const EnsembleResult r = run_ensemble(p);
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes) {
                        const PairProbability est = estimate_pair_prob(r.table, x, sx, y, sy);
                        const double q =
                            quantum_pair_prob(p.initial_state, p.directions[x], sx, p.directions[y], sy);
                        const double sigma = std::sqrt(q * (1 - q) / double(est.n_conditioning));
                        ++comparisons;
                        if (!est.defined || std::abs(est.estimate - q) > 4 * sigma + 1e-12) ++exceed;
                    }
    }
    const double t = seconds_since(t0);
    return {exceed <= 1 && t < 60.0,
            fmt("20 configs x 1e6 runs, %d of %d cell probabilities beyond 4 sigma (allowed 1), %.1f s",
                exceed, comparisons, t)};
}

Verdict desk_scale_violation() {
    const auto t0 = std::chrono::steady_clock::now();
    ProtocolConfig p;
    p.mode = Mode::prepared;
    p.prep = {A, P};
    p.directions = reference_configuration(Objective::eq18).directions();
    p.n_runs = 1'000'000;
    const EnsembleResult r = run_ensemble(p);
    const InequalityReport e7 = eval_eq7(r.table, 5.0);
    const double lhs = lhs18_from_eq7(e7);
    const double t = seconds_since(t0);
    return {e7.defined && e7.n_sigma <= -5.0 && lhs >= 1.85 && lhs <= 1.97 && t < 10.0,
            fmt("EQ7 margin %.5f = %.1f sigma, lhs18 estimate %.4f (window [1.85, 1.97]), %.2f s",
                e7.margin, e7.n_sigma, lhs, t)};
}

Verdict lhv_satisfaction() {
    RandomStream rng(5);
    int violated = 0, eq4_failures = 0;
    double worst_sigma = 0.0;
    for (int k = 0; k < 50; ++k) {
        ProtocolConfig p;
        p.model = Model::lhv;
        p.n_runs = 1'000'000;
        p.seed = 5000 + k;
        p.distribution = random_distribution(rng);
        p.directions = random_directions(rng);
        const EnsembleResult r = run_ensemble(p);
        for (const InequalityReport& rep :
             {eval_eq6(r.table, 5.0), eval_eq7(r.table, 5.0), eval_eq8(r.table, 5.0), eval_eq10(r.table, 5.0)}) {
            if (!rep.defined || rep.violated) ++violated;
            worst_sigma = std::min(worst_sigma, rep.n_sigma);
        }
        const InequalityReport e4 = check_count_inequality(*r.hidden);
        if (e4.violated || e4.margin < 0) ++eq4_failures;
    }
    return {violated == 0 && eq4_failures == 0,
            fmt("50 distributions x 1e6 runs: %d reports violated (most negative %.2f sigma), "
                "%d hidden tables break the count inequality",
                violated, worst_sigma, eq4_failures)};
}

Verdict eq5_factor() {
    // The two reference ensembles: uniform population at 1e6 runs and the
    // point mass on (a+ b- c+) at 9e5 runs.
    const std::vector<std::pair<TripleDistribution, std::uint64_t>> ensembles = {
        {TripleDistribution(), 1'000'000},
        {TripleDistribution::point_mass(triple_from_name("pmp")), 900'000}};
    int checked = 0, failed = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < ensembles.size(); ++k) {
        ProtocolConfig p;
        p.model = Model::lhv;
        p.n_runs = ensembles[k].second;
        p.seed = 6000 + k;
        p.distribution = ensembles[k].first;
        const EnsembleResult r = run_ensemble(p);
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                for (Outcome sx : kOutcomes)
                    for (Outcome sy : kOutcomes) {
                        const RatioEstimate q = eq5_ratio(*r.hidden, r.table, x, sx, y, sy);
                        if (!q.defined || q.marginal < 1000) continue;
                        ++checked;
                        const double z = q.std_error > 0 ? std::abs(q.value - 1) / q.std_error : 0.0;
                        worst = std::max(worst, z);
                        if (std::abs(q.value - 1.0) > 3 * q.std_error) ++failed;
                    }
    }
    return {failed == 0 && checked > 0,
            fmt("%zu ensembles, %d cells with hidden marginal >= 1000, %d beyond 3 sigma (max %.2f sigma)",
                ensembles.size(), checked, failed, worst)};
}

Verdict perfect_correlation() {
    RandomStream rng(7);
    std::string detail;
    bool ok = true;
    for (Model m : {Model::quantum, Model::lhv}) {
        ProtocolConfig p;
        p.model = m;
        p.n_runs = 1'000'000;
        p.seed = 7000 + static_cast<int>(m);
        p.initial_state = random_state(rng);
        p.distribution = random_distribution(rng);
        p.directions = random_directions(rng);
        const FractionEstimate f = perfect_correlation_check(run_ensemble(p).table);
        ok = ok && f.defined && f.total >= 100'000 && f.matched == f.total;
        detail += fmt("%s %llu/%llu ", std::string(model_name(m)).c_str(),
                      (unsigned long long)f.matched, (unsigned long long)f.total);
    }
    return {ok, detail + "same-setting runs agree"};
}

Verdict optimizer() {
    SearchConfig cfg;
    cfg.n_starts = 20;
    cfg.objective = Objective::eq16;
    const SearchResult m16 = maximize(cfg);
    cfg.objective = Objective::eq18;
    const SearchResult m18 = maximize(cfg);
    const double deg = std::numbers::pi / 180;
    const GridResult g16 = grid_oracle(Objective::eq16, deg);
    const GridResult g18 = grid_oracle(Objective::eq18, deg);

    RandomStream rng(8);
    double worst = 0.0;
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        TripleConfiguration c;
        for (double& a : c.angles) a = 2 * std::numbers::pi * rng.uniform();
        for (Objective kind : {Objective::eq16, Objective::eq18}) {
            const auto g = gradient(kind, c);
            for (int j = 0; j < 6; ++j) {
                TripleConfiguration up = c, dn = c;
                up.angles[j] += h;
                dn.angles[j] -= h;
                const double fd = (objective(kind, up) - objective(kind, dn)) / (2 * h);
                worst = std::max(worst, std::abs(g[j] - fd) / std::max(1.0, std::abs(g[j])));
            }
        }
    }
    const bool max_ok = m16.value >= 1.49 && m18.value >= 1.99;
    const bool grid16_ok = std::abs(g16.value - 1.5) <= 5e-4;
    const bool grid18_ok = std::abs(g18.value - 2.0) <= 5e-4;
    const bool grad_ok = worst <= 1e-6;
    return {max_ok && grid16_ok && grid18_ok && grad_ok,
            fmt("maximize EQ16 %.12f, EQ18 %.12f; grid EQ16 %.9f (target 1.5 +- 5e-4: %s), "
                "grid EQ18 %.9f (target 2.0 +- 5e-4: %s); gradient max rel err %.1e",
                m16.value, m18.value, g16.value, grid16_ok ? "ok" : "miss", g18.value,
                grid18_ok ? "ok" : "miss", worst)};
}

std::string run_text(const std::string& config, tbell_command command) {
    tbell_config* c = nullptr;
    if (tbell_config_parse(config.c_str(), &c) != TBELL_OK) return "config error: " + std::string(tbell_last_error());
    tbell_result* r = nullptr;
    std::string out;
    if (tbell_run(c, command, 0, &r) == TBELL_OK) {
        const char* text = nullptr;
        tbell_result_text(r, &text);
        out = text;
        tbell_result_free(r);
    } else {
        out = "run error: " + std::string(tbell_last_error());
    }
    tbell_config_free(c);
    return out;
}

Verdict determinism() {
    const std::vector<std::pair<std::string, tbell_command>> cases = {
        {"n_runs = 300000\nseed = 11", TBELL_SIMULATE},
        {"n_runs = 300000\nseed = 12\nmodel = lhv\ndisturbance = resample-after-second", TBELL_SIMULATE},
        {"n_runs = 300000\nseed = 13\nmode = two-series", TBELL_SIMULATE},
        {"n_runs = 300000\nseed = 14\nmode = prepared\nmodel = lhv", TBELL_SIMULATE},
        {"search.objective = eq16\nseed = 15\nsearch.grid_resolution = 0.05", TBELL_OPTIMIZE},
        {"search.objective = eq18\nseed = 16\nsearch.grid_resolution = 0.05", TBELL_OPTIMIZE},
    };
    int mismatches = 0;
    for (const auto& [base, command] : cases) {
        const std::string cfg = base + "\nformat = structured\n";
        const std::string one = run_text(cfg + "workers = 1\n", command);
        const std::string again = run_text(cfg + "workers = 1\n", command);
        const std::string eight = run_text(cfg + "workers = 8\n", command);
        if (one.rfind('{', 0) != 0 || one != again || one != eight) ++mismatches;
    }
    return {mismatches == 0, fmt("%zu structured reports (simulate and optimize) repeated with 1 and 8 "
                                 "workers, %d differ",
                                 cases.size(), mismatches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"closed-form reference values", closed_form_values},
        {"state independence of E(x,y)", state_independence},
        {"quantum Monte Carlo agreement", quantum_monte_carlo},
        {"quantum violation at desk scale", desk_scale_violation},
        {"LHV satisfaction", lhv_satisfaction},
        {"1/9 sampling factor", eq5_factor},
        {"perfect correlation", perfect_correlation},
        {"optimizer, grid oracle and gradients", optimizer},
        {"determinism across repeats and workers", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Verdict v = criteria[i].second();
        std::printf("%s  criterion %zu: %s -- %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%zu of %zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
