#include "tbell/lhv.hpp"

#include <cmath>
#include <numeric>

#include "tbell/error.hpp"

namespace tbell {

char setting_name(Setting s) { return "ABC"[index_of(s)]; }

Setting parse_setting(std::string_view text) {
    if (text == "A" || text == "a") return Setting::A;
    if (text == "B" || text == "b") return Setting::B;
    if (text == "C" || text == "c") return Setting::C;
    throw_invalid("unknown setting '" + std::string(text) + "' (expected A, B or C)");
}

std::size_t HiddenTriple::index() const {
    return (signs[0] == Outcome::minus ? 4u : 0u) + (signs[1] == Outcome::minus ? 2u : 0u) +
           (signs[2] == Outcome::minus ? 1u : 0u);
}

HiddenTriple HiddenTriple::from_index(std::size_t i) {
    if (i >= 8) throw_invalid("hidden triple index out of range");
    HiddenTriple t;
    t.signs[0] = (i & 4u) ? Outcome::minus : Outcome::plus;
    t.signs[1] = (i & 2u) ? Outcome::minus : Outcome::plus;
    t.signs[2] = (i & 1u) ? Outcome::minus : Outcome::plus;
    return t;
}

std::string HiddenTriple::name() const {
    std::string n(3, 'p');
    for (std::size_t k = 0; k < 3; ++k)
        if (signs[k] == Outcome::minus) n[k] = 'm';
    return n;
}

HiddenTriple triple_from_name(std::string_view name) {
    if (name.size() != 3) throw_invalid("triple name must have three letters");
    HiddenTriple t;
    for (std::size_t k = 0; k < 3; ++k) {
        if (name[k] == 'p') t.signs[k] = Outcome::plus;
        else if (name[k] == 'm') t.signs[k] = Outcome::minus;
        else throw_invalid("triple name letters must be 'p' or 'm'");
    }
    return t;
}

TripleDistribution::TripleDistribution() : TripleDistribution(std::array<double, 8>{
    0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125}) {}

TripleDistribution::TripleDistribution(const std::array<double, 8>& weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0) throw_invalid("triple weights must be finite and >= 0");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw_invalid("triple weights must sum to 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        weights_[i] = std::abs(sum - 1.0) <= 1e-12 ? weights[i] : weights[i] / sum;
        acc += weights_[i];
        cumulative_[i] = acc;
    }
}

TripleDistribution TripleDistribution::point_mass(const HiddenTriple& t) {
    std::array<double, 8> w{};
    w[t.index()] = 1.0;
    return TripleDistribution(w);
}

TripleDistribution TripleDistribution::conditioned(Setting setting, Outcome outcome) const {
    std::array<double, 8> w{};
    double mass = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        if (lhv_read(HiddenTriple::from_index(i), setting) == outcome) {
            w[i] = weights_[i];
            mass += w[i];
        }
    }
    if (mass <= 0.0)
        throw_invalid(std::string("population has no weight on realities with ") +
                      setting_name(setting) + (outcome == Outcome::plus ? "+" : "-"));
    for (double& x : w) x /= mass;
    return TripleDistribution(w);
}

std::uint64_t HiddenCountTable::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

HiddenCountTable& HiddenCountTable::merge(const HiddenCountTable& o) {
    for (std::size_t i = 0; i < 8; ++i) counts[i] += o.counts[i];
    return *this;
}

std::string_view disturbance_name(Disturbance d) {
    switch (d) {
        case Disturbance::none: return "none";
        case Disturbance::resample_after_second: return "resample-after-second";
        case Disturbance::flip_unmeasured_after_second: return "flip-unmeasured-after-second";
    }
    return "?";
}

Disturbance parse_disturbance(std::string_view text) {
    if (text == "none") return Disturbance::none;
    if (text == "resample-after-second") return Disturbance::resample_after_second;
    if (text == "flip-unmeasured-after-second") return Disturbance::flip_unmeasured_after_second;
    throw_invalid("unknown disturbance model '" + std::string(text) + "'");
}

HiddenTriple sample_triple(const TripleDistribution& dist, RandomStream& rng) {
    const double u = rng.uniform();
    for (std::size_t i = 0; i < 7; ++i) {
        if (u < dist.cumulative_[i] && dist.weights_[i] > 0.0) return HiddenTriple::from_index(i);
    }
    // Rounding in the running sum can leave the last bins short; fall back
    // to the last triple with positive weight.
    for (std::size_t i = 8; i-- > 0;)
        if (dist.weights_[i] > 0.0) return HiddenTriple::from_index(i);
    return HiddenTriple{};
}

HiddenTriple apply_disturbance(const HiddenTriple& t, Disturbance kind, Setting first,
                               Setting second, const TripleDistribution& dist,
                               RandomStream& rng) {
    switch (kind) {
        case Disturbance::none: return t;
        case Disturbance::resample_after_second: return sample_triple(dist, rng);
        case Disturbance::flip_unmeasured_after_second: {
            HiddenTriple out = t;
            for (Setting s : kSettings)
                if (s != first && s != second) out.signs[index_of(s)] = flip(out.signs[index_of(s)]);
            return out;
        }
    }
    return t;
}

MarginalCounts hidden_marginals(const HiddenCountTable& table, MarginalRule rule) {
    MarginalCounts m;
    for (std::size_t i = 0; i < 8; ++i) {
        const HiddenTriple t = HiddenTriple::from_index(i);
        const std::uint64_t n = table.counts[i];
        for (Setting x : kSettings)
            for (Setting y : kSettings)
                m.cells[cell_index(x, lhv_read(t, x), y, lhv_read(t, y))] += n;
    }
    if (rule == MarginalRule::repeated_term) {
        const auto at = [&](const char* name) { return table.at(triple_from_name(name)); };
        m.cells[cell_index(Setting::B, Outcome::plus, Setting::C, Outcome::minus)] =
            at("ppm") + at("pmm");
    }
    return m;
}

InequalityReport check_count_inequality(const HiddenCountTable& table, MarginalRule rule) {
    const MarginalCounts m = hidden_marginals(table, rule);
    const auto lhs = m.at(Setting::A, Outcome::plus, Setting::C, Outcome::minus);
    const auto rhs = m.at(Setting::A, Outcome::plus, Setting::B, Outcome::minus) +
                     m.at(Setting::B, Outcome::plus, Setting::C, Outcome::minus);
    return make_report(InequalityId::EQ4, static_cast<double>(lhs), static_cast<double>(rhs), 0.0,
                       kDefaultSignificance, table.total());
}

}  // namespace tbell
