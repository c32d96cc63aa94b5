#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tbell/engine.hpp"

namespace tbell {

enum class Objective { eq16, eq18 };

std::string_view objective_name(Objective o);
Objective parse_objective(std::string_view text);

/// (theta_a, phi_a, theta_b, phi_b, theta_c, phi_c), polar/azimuth pairs.
struct TripleConfiguration {
    std::array<double, 6> angles{};

    Directions directions() const;
    bool operator==(const TripleConfiguration&) const = default;
    auto operator<=>(const TripleConfiguration&) const = default;
};

struct SearchConfig {
    Objective objective = Objective::eq16;
    std::uint32_t n_starts = 20;
    double step_tolerance = 1e-10;
    std::uint64_t max_iterations = 200'000;
    std::uint64_t seed = 42;
    unsigned workers = 1;
    /// Used as the first starts; the remainder are uniform on the sphere.
    std::vector<TripleConfiguration> starts;

    bool operator==(const SearchConfig&) const = default;
};

void validate(const SearchConfig& config);

double objective(Objective kind, const TripleConfiguration& config);

/// Exact partial derivatives with respect to the six angles.
std::array<double, 6> gradient(Objective kind, const TripleConfiguration& config);

struct LocalSearchResult {
    TripleConfiguration best;
    double value = 0.0;
    double gradient_norm = 0.0;
    std::uint64_t iterations = 0;
    bool budget_exhausted = false;
};

/// Backtracking gradient ascent from `start`. When `trace` is non-null the
/// objective after every accepted step is appended to it.
LocalSearchResult local_ascent(Objective kind, const TripleConfiguration& start,
                               const SearchConfig& config, RandomStream& rng,
                               std::vector<double>* trace = nullptr);

struct SearchResult {
    TripleConfiguration best;
    double value = 0.0;
    double gradient_norm = 0.0;
    std::uint64_t iterations = 0;
    /// Some local search hit max_iterations.
    bool budget_exhausted = false;
    std::uint32_t n_starts = 0;
};

/// Multi-start ascent; ties are broken by the lexicographically smallest
/// configuration so the result does not depend on scheduling.
SearchResult maximize(const SearchConfig& config);

struct GridResult {
    double value = 0.0;
    TripleConfiguration best;
    std::uint64_t evaluations = 0;
};

/// Exhaustive scan with a at the north pole and phi_b = 0, the three
/// remaining angles on uniform grids of spacing <= resolution (radians).
/// Throws for resolution < 0.005.
GridResult grid_oracle(Objective kind, double resolution);

/// The violating configurations exhibited for each expression: b orthogonal
/// to c with a along b - c (value sqrt 2), and a orthogonal to c with b along
/// a + c (value sqrt 2 + 1/2).
TripleConfiguration reference_configuration(Objective kind);

/// Analytic global maxima: 3/2 for eq16, 7/3 for eq18.
double global_maximum(Objective kind);

}  // namespace tbell
