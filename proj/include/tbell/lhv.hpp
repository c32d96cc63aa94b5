#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "tbell/qubit.hpp"
#include "tbell/report.hpp"
#include "tbell/rng.hpp"

namespace tbell {

/// One of the three measurement settings a, b, c.
enum class Setting : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr std::array<Setting, 3> kSettings{Setting::A, Setting::B, Setting::C};
inline constexpr std::array<Outcome, 2> kOutcomes{Outcome::plus, Outcome::minus};

constexpr std::size_t index_of(Setting s) { return static_cast<std::size_t>(s); }
char setting_name(Setting s);
Setting parse_setting(std::string_view text);

/// Cell index shared by run-count tables and hidden pair marginals:
/// (3 * first + second) * 4 + 2 * [first outcome is -1] + [second is -1].
constexpr std::size_t cell_index(Setting x, Outcome sx, Setting y, Outcome sy) {
    return (3 * index_of(x) + index_of(y)) * 4 + (sx == Outcome::minus ? 2 : 0) +
           (sy == Outcome::minus ? 1 : 0);
}
constexpr std::size_t kCells = 36;

/// A joint reality (a^alpha b^beta c^gamma).
struct HiddenTriple {
    std::array<Outcome, 3> signs{Outcome::plus, Outcome::plus, Outcome::plus};

    /// Bit 2 = a is -1, bit 1 = b is -1, bit 0 = c is -1.
    std::size_t index() const;
    static HiddenTriple from_index(std::size_t i);
    /// Three letters from {p, m}, e.g. "pmp" for (a+ b- c+).
    std::string name() const;

    bool operator==(const HiddenTriple&) const = default;
};

HiddenTriple triple_from_name(std::string_view name);

/// Population over the eight joint realities.
class TripleDistribution {
public:
    /// Uniform.
    TripleDistribution();
    /// Weights must be non-negative and sum to 1 within 1e-9; sums further
    /// than 1e-12 from 1 are rescaled.
    explicit TripleDistribution(const std::array<double, 8>& weights);

    static TripleDistribution point_mass(const HiddenTriple& t);

    const std::array<double, 8>& weights() const { return weights_; }
    double weight(const HiddenTriple& t) const { return weights_[t.index()]; }

    /// Conditional population given that `setting` reads `outcome`.
    TripleDistribution conditioned(Setting setting, Outcome outcome) const;

    bool operator==(const TripleDistribution&) const = default;

private:
    std::array<double, 8> weights_;
    std::array<double, 8> cumulative_;

    friend HiddenTriple sample_triple(const TripleDistribution&, RandomStream&);
};

/// N(a^alpha b^beta c^gamma): realities present between the two
/// measurements of each run.
struct HiddenCountTable {
    std::array<std::uint64_t, 8> counts{};

    void add(const HiddenTriple& t) { ++counts[t.index()]; }
    std::uint64_t at(const HiddenTriple& t) const { return counts[t.index()]; }
    std::uint64_t total() const;
    HiddenCountTable& merge(const HiddenCountTable& o);

    bool operator==(const HiddenCountTable&) const = default;
};

enum class Disturbance { none, resample_after_second, flip_unmeasured_after_second };

std::string_view disturbance_name(Disturbance d);
Disturbance parse_disturbance(std::string_view text);

HiddenTriple sample_triple(const TripleDistribution& dist, RandomStream& rng);

/// Deterministic readout of the setting's component.
constexpr Outcome lhv_read(const HiddenTriple& t, Setting s) { return t.signs[index_of(s)]; }

/// Reality after the second measurement of a run under `kind`.
HiddenTriple apply_disturbance(const HiddenTriple& t, Disturbance kind, Setting first,
                               Setting second, const TripleDistribution& dist,
                               RandomStream& rng);

/// Pair marginals N(x^alpha y^beta), indexed by cell_index.
struct MarginalCounts {
    std::array<std::uint64_t, kCells> cells{};

    std::uint64_t at(Setting x, Outcome sx, Setting y, Outcome sy) const {
        return cells[cell_index(x, sx, y, sy)];
    }
};

/// `repeated_term` is a deliberately faulty rule in which N(b+c-) repeats the
/// terms of N(a+c-). It exists only for fault-injection checks.
enum class MarginalRule { corrected, repeated_term };

MarginalCounts hidden_marginals(const HiddenCountTable& table,
                                MarginalRule rule = MarginalRule::corrected);

/// N(a+c-) <= N(a+b-) + N(b+c-) on hidden counts.
InequalityReport check_count_inequality(const HiddenCountTable& table,
                                        MarginalRule rule = MarginalRule::corrected);

}  // namespace tbell
