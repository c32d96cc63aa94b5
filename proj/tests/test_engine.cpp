#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tbell/engine.hpp"
#include "tbell/error.hpp"
#include "tbell/inequalities.hpp"

using namespace tbell;

namespace {

constexpr Outcome P = Outcome::plus;
constexpr Outcome M = Outcome::minus;
constexpr Setting A = Setting::A;
constexpr Setting B = Setting::B;
constexpr Setting C = Setting::C;

Directions random_directions(RandomStream& rng) {
    return {random_direction(rng), random_direction(rng), random_direction(rng)};
}

ProtocolConfig quantum_config(std::uint64_t n, std::uint64_t seed = 42) {
    ProtocolConfig p;
    p.n_runs = n;
    p.seed = seed;
    p.directions = {Direction::from_xyz(0, 0, 1), Direction::from_xyz(1, 0, 0),
                    Direction::from_xyz(0.6, 0, -0.8)};
    return p;
}

// |freq - p| <= 4 sigma for a binomial fraction of n trials.
void expect_binomial(std::uint64_t k, std::uint64_t n, double p) {
    ASSERT_GT(n, 0u);
    const double sigma = std::sqrt(p * (1 - p) / double(n));
    EXPECT_LE(std::abs(double(k) / double(n) - p), 4 * sigma + 1e-12)
        << k << "/" << n << " vs " << p;
}

}  // namespace

TEST(DrawSettingPair, UniformOverNinePairs) {
    RandomStream rng(1);
    const int n = 900'000;
    std::array<int, 9> counts{};
    for (int i = 0; i < n; ++i) {
        const SettingPair p = draw_setting_pair(rng);
        ++counts[3 * index_of(p.first) + index_of(p.second)];
    }
    double chi2 = 0.0;
    for (int c : counts) {
        expect_binomial(c, n, 1.0 / 9);
        chi2 += (c - n / 9.0) * (c - n / 9.0) / (n / 9.0);
    }
    // 99.9th percentile of chi-square with 8 degrees of freedom.
    EXPECT_LT(chi2, 26.12);
}

TEST(ExecuteRunQuantum, SameSettingAgrees) {
    RandomStream rng(2);
    for (int i = 0; i < 50'000; ++i) {
        const PureState st = random_state(rng);
        const Directions d = random_directions(rng);
        for (Setting s : kSettings) {
            const RunRecord r = execute_run_quantum(st, d, {s, s}, rng);
            ASSERT_EQ(r.first_outcome, r.second_outcome);
        }
    }
}

TEST(ExecuteRunQuantum, EigenstateFrequencies) {
    RandomStream rng(3);
    const Directions d = quantum_config(1).directions;
    const PureState a_plus = eigenstate(d.a, P);
    const int n = 400'000;
    std::uint64_t ab_minus = 0, bc_pm = 0;
    for (int i = 0; i < n; ++i) {
        const RunRecord r = execute_run_quantum(a_plus, d, {A, B}, rng);
        ASSERT_EQ(r.first_outcome, P);
        ab_minus += r.second_outcome == M;
        const RunRecord s = execute_run_quantum(a_plus, d, {B, C}, rng);
        bc_pm += s.first_outcome == P && s.second_outcome == M;
    }
    const double ab = dot(d.a, d.b), bc = dot(d.b, d.c);
    expect_binomial(ab_minus, n, (1 - ab) / 2);
    expect_binomial(bc_pm, n, (1 + ab) * (1 - bc) / 4);
}

TEST(ExecuteRunLhv, PointMassAndSameSetting) {
    RandomStream rng(4);
    const TripleDistribution pm = TripleDistribution::point_mass(triple_from_name("pmp"));
    const LhvRun r = execute_run_lhv(pm, {A, B}, Disturbance::none, rng);
    EXPECT_EQ(r.record.first_outcome, P);
    EXPECT_EQ(r.record.second_outcome, M);
    EXPECT_EQ(r.between.name(), "pmp");
    for (Disturbance dist : {Disturbance::none, Disturbance::resample_after_second,
                             Disturbance::flip_unmeasured_after_second})
        for (int i = 0; i < 10'000; ++i) {
            const Setting s = kSettings[i % 3];
            const LhvRun run = execute_run_lhv(TripleDistribution(), {s, s}, dist, rng);
            ASSERT_EQ(run.record.first_outcome, run.record.second_outcome);
        }
}

TEST(RunEnsemble, RejectsZeroRuns) {
    EXPECT_THROW(run_ensemble(quantum_config(0)), Error);
    ProtocolConfig p = quantum_config(1);
    EXPECT_EQ(run_ensemble(p).table.total_runs(), 1u);
    p.chunk_size = 0;
    EXPECT_THROW(run_ensemble(p), Error);
    p = quantum_config(10);
    p.workers = 0;
    EXPECT_THROW(run_ensemble(p), Error);
}

TEST(RunEnsemble, WorkerCountDoesNotChangeResults) {
    for (Mode mode : {Mode::free, Mode::two_series, Mode::prepared})
        for (Model model : {Model::quantum, Model::lhv}) {
            ProtocolConfig p = quantum_config(200'003, 7);
            p.mode = mode;
            p.model = model;
            p.chunk_size = 10'000;
            p.keep_records = true;
            p.disturbance = Disturbance::resample_after_second;
            p.workers = 1;
            const EnsembleResult one = run_ensemble(p);
            p.workers = 8;
            const EnsembleResult eight = run_ensemble(p);
            EXPECT_EQ(one.table, eight.table);
            EXPECT_EQ(one.hidden, eight.hidden);
            EXPECT_EQ(one.series_plus, eight.series_plus);
            EXPECT_EQ(one.series_minus, eight.series_minus);
            EXPECT_EQ(one.records, eight.records);
        }
}

TEST(RunEnsemble, SeedChangesResults) {
    EXPECT_NE(run_ensemble(quantum_config(10'000, 1)).table,
              run_ensemble(quantum_config(10'000, 2)).table);
}

TEST(RunEnsemble, DisturbanceLeavesRecordsUnchanged) {
    ProtocolConfig p = quantum_config(50'000);
    p.model = Model::lhv;
    p.keep_records = true;
    const EnsembleResult base = run_ensemble(p);
    for (Disturbance d : {Disturbance::resample_after_second, Disturbance::flip_unmeasured_after_second}) {
        p.disturbance = d;
        const EnsembleResult other = run_ensemble(p);
        EXPECT_EQ(base.records, other.records);
        EXPECT_EQ(base.hidden, other.hidden);
    }
}

TEST(RunEnsemble, RecordsMatchTable) {
    ProtocolConfig p = quantum_config(30'000);
    p.keep_records = true;
    const EnsembleResult r = run_ensemble(p);
    ASSERT_EQ(r.records.size(), 30'000u);
    RunCountTable t;
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        EXPECT_EQ(r.records[i].run_id, i);
        t.add(r.records[i]);
    }
    EXPECT_EQ(t, r.table);
}

TEST(RunEnsemble, HiddenTotalEqualsRuns) {
    ProtocolConfig p = quantum_config(12'345);
    p.model = Model::lhv;
    const EnsembleResult r = run_ensemble(p);
    ASSERT_TRUE(r.hidden.has_value());
    EXPECT_EQ(r.hidden->total(), 12'345u);
    EXPECT_FALSE(run_ensemble(quantum_config(10)).hidden.has_value());
}

TEST(RunEnsemble, QuantumExpectationMatchesDot) {
    RandomStream rng(5);
    ProtocolConfig p = quantum_config(1'000'000, 11);
    p.initial_state = random_state(rng);
    const EnsembleResult r = run_ensemble(p);
    const ExpectationEstimate e = estimate_expectation(r.table, A, B);
    ASSERT_TRUE(e.defined);
    EXPECT_LE(std::abs(e.estimate - dot(p.directions.a, p.directions.b)), 4 * e.std_error);
}

TEST(PreparedRun, FirstOutcomeOnPreparedSetting) {
    ProtocolConfig p = quantum_config(1);
    p.mode = Mode::prepared;
    RandomStream rng(6);
    for (int i = 0; i < 20'000; ++i) {
        const PreparedRun r = prepared_run(p, rng);
        ASSERT_TRUE(r.record.prep.has_value());
        if (r.record.first_setting == A) ASSERT_EQ(r.record.first_outcome, P);
    }
}

TEST(PreparedRun, OrthogonalSettingFrequency) {
    ProtocolConfig p = quantum_config(1'000'000, 3);
    p.mode = Mode::prepared;
    p.directions.c = Direction::from_xyz(1, 0, 0);  // a.c = 0
    const EnsembleResult r = run_ensemble(p);
    const PairProbability pr = estimate_pair_prob(r.table, A, P, C, M);
    ASSERT_TRUE(pr.defined);
    EXPECT_LE(std::abs(pr.estimate - 0.5), 4 * std::sqrt(0.25 / pr.n_conditioning));
}

TEST(PreparedRun, LhvSatisfiesProbabilityInequality) {
    RandomStream rng(7);
    for (int k = 0; k < 3; ++k) {
        ProtocolConfig p = quantum_config(300'000, 100 + k);
        p.mode = Mode::prepared;
        p.model = Model::lhv;
        std::array<double, 8> w;
        double sum = 0;
        for (double& x : w) sum += (x = rng.uniform() + 0.01);
        for (double& x : w) x /= sum;
        p.distribution = TripleDistribution(w);
        const EnsembleResult r = run_ensemble(p);
        EXPECT_FALSE(eval_eq7(r.table).violated);
        EXPECT_FALSE(check_count_inequality(*r.hidden).violated);
        // Every retained reality reads + on the prepared setting.
        for (std::size_t i = 0; i < 8; ++i)
            if (lhv_read(HiddenTriple::from_index(i), A) == M) EXPECT_EQ(r.hidden->counts[i], 0u);
    }
}

TEST(EstimatePairProb, DegenerateTables) {
    RunCountTable t;
    t.cells[cell_index(A, P, B, P)] = 50;
    const PairProbability p = estimate_pair_prob(t, A, P, B, P);
    EXPECT_TRUE(p.defined);
    EXPECT_EQ(p.estimate, 1.0);
    EXPECT_EQ(p.std_error, 0.0);
    EXPECT_EQ(p.n_conditioning, 50u);
    EXPECT_FALSE(estimate_pair_prob(t, B, P, C, P).defined);
    t.cells[cell_index(A, M, B, P)] = 5;
    EXPECT_TRUE(estimate_pair_prob(t, A, M, B, P).low_stats);
}

TEST(EstimatePairProb, LhvPointMass) {
    ProtocolConfig p = quantum_config(10'000);
    p.model = Model::lhv;
    p.distribution = TripleDistribution::point_mass(triple_from_name("pmp"));
    const EnsembleResult r = run_ensemble(p);
    EXPECT_EQ(estimate_pair_prob(r.table, A, P, B, M).estimate, 1.0);
}

TEST(EstimatePairProb, QuantumPreparedClosedForm) {
    ProtocolConfig p = quantum_config(1'000'000, 5);
    p.mode = Mode::prepared;
    const EnsembleResult r = run_ensemble(p);
    const PairProbability pr = estimate_pair_prob(r.table, A, P, B, M);
    const double expected = (1 - dot(p.directions.a, p.directions.b)) / 2;
    EXPECT_LE(std::abs(pr.estimate - expected), 4 * std::sqrt(expected * (1 - expected) / pr.n_conditioning));
}

TEST(EstimateExpectation, SameSettingAndOrthogonal) {
    ProtocolConfig p = quantum_config(1'000'000, 9);
    RandomStream rng(8);
    p.initial_state = random_state(rng);
    const EnsembleResult r = run_ensemble(p);
    const ExpectationEstimate same = estimate_expectation(r.table, B, B);
    EXPECT_EQ(same.estimate, 1.0);
    const ExpectationEstimate orth = estimate_expectation(r.table, A, B);  // a.b = 0
    EXPECT_LE(std::abs(orth.estimate), 4 * orth.std_error);
    const ExpectationEstimate ac = estimate_expectation(r.table, A, C);
    EXPECT_LE(std::abs(ac.estimate + 0.8), 4 * ac.std_error);
    EXPECT_FALSE(estimate_expectation(RunCountTable{}, A, B).defined);
}

TEST(TwoSeries, CombinedExpectation) {
    ProtocolConfig p = quantum_config(1'000'000, 13);
    p.mode = Mode::two_series;
    RandomStream rng(9);
    p.initial_state = random_state(rng);
    const EnsembleResult r = run_ensemble(p);
    ASSERT_TRUE(r.series_plus && r.series_minus);
    EXPECT_EQ(r.series_plus->total_runs(), 1'000'000u);
    EXPECT_EQ(r.series_minus->total_runs(), 1'000'000u);
    for (Setting x : kSettings)
        for (Setting y : kSettings) {
            const ExpectationEstimate e = two_series_estimate(*r.series_plus, *r.series_minus, x, y);
            ASSERT_TRUE(e.defined);
            EXPECT_LE(std::abs(e.estimate - dot(p.directions[x], p.directions[y])),
                      4 * e.std_error + 1e-12);
        }
}

TEST(TwoSeries, UndefinedWithoutRetainedRuns) {
    SeriesTable plus, minus;
    plus.retained_sign = P;
    minus.retained_sign = M;
    plus.discarded[0] = 10;
    EXPECT_FALSE(two_series_estimate(plus, minus, A, B).defined);
    EXPECT_FALSE(estimate_pair_prob(plus, A, M, B, P).defined);
}

TEST(PerfectCorrelation, ModelsAndSyntheticRecords) {
    RandomStream rng(10);
    for (Model m : {Model::quantum, Model::lhv}) {
        ProtocolConfig p = quantum_config(200'000, 21);
        p.model = m;
        p.initial_state = random_state(rng);
        p.directions = random_directions(rng);
        p.keep_records = true;
        const EnsembleResult r = run_ensemble(p);
        const FractionEstimate f = perfect_correlation_check(r.records);
        EXPECT_TRUE(f.defined);
        EXPECT_EQ(f.value, 1.0);
        EXPECT_EQ(perfect_correlation_check(r.table).matched, f.matched);
    }
    std::vector<RunRecord> recs(10);
    for (auto& r : recs) r.first_setting = r.second_setting = B;
    recs[3].second_outcome = M;
    EXPECT_DOUBLE_EQ(perfect_correlation_check(recs).value, 0.9);
    recs.assign(1, RunRecord{0, {}, A, B, P, P});
    EXPECT_FALSE(perfect_correlation_check(recs).defined);
}

TEST(CountTableCsv, RoundTripAndHeader) {
    const EnsembleResult r = run_ensemble(quantum_config(5000));
    std::stringstream s;
    write_count_table(s, r.table);
    const std::string text = s.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "pair_first,pair_second,outcome_first,outcome_second,count");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 37);
    std::istringstream in(text);
    EXPECT_EQ(read_count_table(in), r.table);
}

TEST(CountTableCsv, RejectsMalformedInput) {
    std::istringstream bad_header("a,b,c\n");
    EXPECT_THROW(read_count_table(bad_header), Error);
    std::stringstream s;
    write_count_table(s, RunCountTable{});
    std::string text = s.str();
    text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop last row
    std::istringstream short_table(text);
    EXPECT_THROW(read_count_table(short_table), Error);
}

TEST(RunLog, Format) {
    ProtocolConfig p = quantum_config(3);
    p.mode = Mode::prepared;
    p.keep_records = true;
    const EnsembleResult r = run_ensemble(p);
    std::ostringstream out;
    write_run_log(out, r.records, p.mode, p.model);
    std::istringstream in(out.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
        EXPECT_NE(line.find(",prepared,quantum,A,+1,"), std::string::npos) << line;
    }
    EXPECT_EQ(n, 3);
}

TEST(RunCountTable, MergeCommutes) {
    const RunCountTable a = run_ensemble(quantum_config(1000, 1)).table;
    const RunCountTable b = run_ensemble(quantum_config(1000, 2)).table;
    RunCountTable ab = a, ba = b;
    EXPECT_EQ(ab.merge(b), ba.merge(a));
    EXPECT_EQ(ab.total_runs(), 2000u);
}
