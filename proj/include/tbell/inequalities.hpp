#pragma once

#include <string>
#include <string_view>

#include "tbell/engine.hpp"
#include "tbell/lhv.hpp"
#include "tbell/qubit.hpp"
#include "tbell/report.hpp"

namespace tbell {

// Closed-form quantum predictions for one run.

/// P(x^sx, y^sy | state) = born_prob(state, x, sx) * (1 + sx sy x.y) / 2.
double quantum_pair_prob(const PureState& state, const Direction& x, Outcome sx,
                         const Direction& y, Outcome sy);

/// E(x, y) = x.y for every initial state. (A singlet pair would give -x.y;
/// that case is not modelled here.)
double quantum_expectation(const Direction& x, const Direction& y);

/// a.b - a.c + b.c; the two-measurement expectation form evaluated on
/// quantum predictions. Quantum mechanics allows up to 3/2.
double lhs16(const Direction& a, const Direction& b, const Direction& c);

/// b.a + b.c - 2 a.c + (a.b)(b.c); the probability form for runs prepared in
/// the a+ eigenstate, rescaled so that the bound is 1. Maximum 7/3.
double lhs18(const Direction& a, const Direction& b, const Direction& c);

PairProbability exact_probability(double p);
ExpectationEstimate exact_expectation(double e);

// Evaluations. `k` is the significance multiplier used for the verdict.

/// N[a+c-] <= N[a+b-] + N[b+c-] on observed counts, multinomial error.
/// `n_total` is the multinomial size when runs outside the table (discarded
/// series runs) belong to the same sample; 0 means table.total_runs().
InequalityReport eval_eq6(const RunCountTable& table, double k = kDefaultSignificance,
                          std::uint64_t n_total = 0);

/// P(a+,c-) <= P(a+,b-) + P(b+,c-); errors added in quadrature.
InequalityReport eval_eq7(const PairProbability& p_ac, const PairProbability& p_ab,
                          const PairProbability& p_bc, double k = kDefaultSignificance,
                          std::uint64_t n_runs = 0);
InequalityReport eval_eq7(const RunCountTable& table, double k = kDefaultSignificance);

/// P(a-,c+) <= P(a-,b+) + P(b-,c+).
InequalityReport eval_eq8(const PairProbability& p_ac, const PairProbability& p_ab,
                          const PairProbability& p_bc, double k = kDefaultSignificance,
                          std::uint64_t n_runs = 0);
InequalityReport eval_eq8(const RunCountTable& table, double k = kDefaultSignificance);

/// E(a,b) + E(b,c) - E(a,c) <= 1.
InequalityReport eval_eq10(const ExpectationEstimate& e_ab, const ExpectationEstimate& e_bc,
                           const ExpectationEstimate& e_ac, double k = kDefaultSignificance,
                           std::uint64_t n_runs = 0);
InequalityReport eval_eq10(const RunCountTable& table, double k = kDefaultSignificance);

InequalityReport eval_eq16(const Directions& d);
InequalityReport eval_eq18(const Directions& d);

/// 1 - 4 * (EQ7 margin): the probability route back to lhs18 when the
/// probabilities come from runs prepared in the a+ eigenstate.
double lhs18_from_eq7(const InequalityReport& eq7);

struct RatioEstimate {
    bool defined = false;
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t observed = 0;
    std::uint64_t marginal = 0;
};

/// 9 N[x^sx y^sy] / N(x^sx y^sy); expected value 1 for lhv ensembles.
RatioEstimate eq5_ratio(const HiddenCountTable& hidden, const RunCountTable& runs, Setting x,
                        Outcome sx, Setting y, Outcome sy,
                        MarginalRule rule = MarginalRule::corrected);

/// JSON document with inequality_id, lhs, rhs, margin, stderr_margin,
/// n_sigma, violated, n_runs, config_digest.
std::string serialize_report(const InequalityReport& report, std::string_view config_digest);

}  // namespace tbell
