#include "tbell/inequalities.hpp"

#include <cmath>

#include "json.hpp"

namespace tbell {

namespace {

constexpr Outcome P = Outcome::plus;
constexpr Outcome M = Outcome::minus;
constexpr Setting A = Setting::A;
constexpr Setting B = Setting::B;
constexpr Setting C = Setting::C;

InequalityReport eval_probability_form(InequalityId id, const PairProbability& lhs,
                                       const PairProbability& r1, const PairProbability& r2,
                                       double k, std::uint64_t n_runs) {
    if (!lhs.defined || !r1.defined || !r2.defined) return undefined_report(id, n_runs);
    const double se = std::sqrt(lhs.std_error * lhs.std_error + r1.std_error * r1.std_error +
                                r2.std_error * r2.std_error);
    return make_report(id, lhs.estimate, r1.estimate + r2.estimate, se, k, n_runs);
}

}  // namespace

double quantum_pair_prob(const PureState& state, const Direction& x, Outcome sx,
                         const Direction& y, Outcome sy) {
    return born_prob(state, x, sx) * (1.0 + sign(sx) * sign(sy) * dot(x, y)) / 2.0;
}

double quantum_expectation(const Direction& x, const Direction& y) { return dot(x, y); }

double lhs16(const Direction& a, const Direction& b, const Direction& c) {
    return dot(a, b) - dot(a, c) + dot(b, c);
}

double lhs18(const Direction& a, const Direction& b, const Direction& c) {
    const double ab = dot(a, b), bc = dot(b, c), ac = dot(a, c);
    return ab + bc - 2.0 * ac + ab * bc;
}

PairProbability exact_probability(double p) {
    PairProbability out;
    out.defined = true;
    out.estimate = p;
    return out;
}

ExpectationEstimate exact_expectation(double e) {
    ExpectationEstimate out;
    out.defined = true;
    out.estimate = e;
    return out;
}

InequalityReport eval_eq6(const RunCountTable& table, double k, std::uint64_t n_total) {
    if (n_total == 0) n_total = table.total_runs();
    const double ac = static_cast<double>(table.at(A, P, C, M));
    const double ab = static_cast<double>(table.at(A, P, B, M));
    const double bc = static_cast<double>(table.at(B, P, C, M));
    if (ac + ab + bc == 0.0) return undefined_report(InequalityId::EQ6, n_total);
    // margin = ab + bc - ac is a linear form in multinomial counts:
    // Var = sum w_i^2 n_i - (sum w_i n_i)^2 / N.
    const double margin = ab + bc - ac;
    const double var =
        std::max(0.0, (ab + bc + ac) - margin * margin / static_cast<double>(n_total));
    return make_report(InequalityId::EQ6, ac, ab + bc, std::sqrt(var), k, n_total);
}

InequalityReport eval_eq7(const PairProbability& p_ac, const PairProbability& p_ab,
                          const PairProbability& p_bc, double k, std::uint64_t n_runs) {
    return eval_probability_form(InequalityId::EQ7, p_ac, p_ab, p_bc, k, n_runs);
}

InequalityReport eval_eq7(const RunCountTable& t, double k) {
    return eval_eq7(estimate_pair_prob(t, A, P, C, M), estimate_pair_prob(t, A, P, B, M),
                    estimate_pair_prob(t, B, P, C, M), k, t.total_runs());
}

InequalityReport eval_eq8(const PairProbability& p_ac, const PairProbability& p_ab,
                          const PairProbability& p_bc, double k, std::uint64_t n_runs) {
    return eval_probability_form(InequalityId::EQ8, p_ac, p_ab, p_bc, k, n_runs);
}

InequalityReport eval_eq8(const RunCountTable& t, double k) {
    return eval_eq8(estimate_pair_prob(t, A, M, C, P), estimate_pair_prob(t, A, M, B, P),
                    estimate_pair_prob(t, B, M, C, P), k, t.total_runs());
}

InequalityReport eval_eq10(const ExpectationEstimate& e_ab, const ExpectationEstimate& e_bc,
                           const ExpectationEstimate& e_ac, double k, std::uint64_t n_runs) {
    if (!e_ab.defined || !e_bc.defined || !e_ac.defined)
        return undefined_report(InequalityId::EQ10, n_runs);
    const double se = std::sqrt(e_ab.std_error * e_ab.std_error + e_bc.std_error * e_bc.std_error +
                                e_ac.std_error * e_ac.std_error);
    return make_report(InequalityId::EQ10, e_ab.estimate + e_bc.estimate - e_ac.estimate, 1.0, se,
                       k, n_runs);
}

InequalityReport eval_eq10(const RunCountTable& t, double k) {
    return eval_eq10(estimate_expectation(t, A, B), estimate_expectation(t, B, C),
                     estimate_expectation(t, A, C), k, t.total_runs());
}

InequalityReport eval_eq16(const Directions& d) {
    return make_report(InequalityId::EQ16, lhs16(d.a, d.b, d.c), 1.0, 0.0, kDefaultSignificance);
}

InequalityReport eval_eq18(const Directions& d) {
    return make_report(InequalityId::EQ18, lhs18(d.a, d.b, d.c), 1.0, 0.0, kDefaultSignificance);
}

double lhs18_from_eq7(const InequalityReport& eq7) { return 1.0 - 4.0 * eq7.margin; }

RatioEstimate eq5_ratio(const HiddenCountTable& hidden, const RunCountTable& runs, Setting x,
                        Outcome sx, Setting y, Outcome sy, MarginalRule rule) {
    RatioEstimate r;
    r.marginal = hidden_marginals(hidden, rule).at(x, sx, y, sy);
    r.observed = runs.at(x, sx, y, sy);
    if (r.marginal == 0) return r;
    const double m = static_cast<double>(r.marginal);
    const double p = static_cast<double>(r.observed) / m;
    r.defined = true;
    r.value = 9.0 * p;
    r.std_error = 9.0 * std::sqrt(p * (1.0 - p) / m);
    return r;
}

std::string serialize_report(const InequalityReport& r, std::string_view config_digest) {
    nlohmann::ordered_json j;
    j["inequality_id"] = inequality_name(r.id);
    j["defined"] = r.defined;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["stderr_margin"] = r.stderr_margin;
    j["n_sigma"] = r.n_sigma;
    j["violated"] = r.violated;
    j["n_runs"] = r.n_runs;
    j["config_digest"] = config_digest;
    return j.dump(2) + "\n";
}

}  // namespace tbell
