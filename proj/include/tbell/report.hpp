#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tbell {

enum class InequalityId { EQ4, EQ6, EQ7, EQ8, EQ10, EQ16, EQ18 };

std::string_view inequality_name(InequalityId id);

/// Outcome of evaluating one inequality instance `lhs <= rhs`.
///
/// For sampled inputs `violated` means margin < -k * stderr_margin. Exact
/// evaluations (stderr_margin == 0) are violated when margin < -1e-12.
struct InequalityReport {
    InequalityId id = InequalityId::EQ4;
    bool defined = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double stderr_margin = 0.0;
    /// margin / stderr_margin; zero for exact evaluations.
    double n_sigma = 0.0;
    bool violated = false;
    std::uint64_t n_runs = 0;
};

InequalityReport make_report(InequalityId id, double lhs, double rhs, double stderr_margin,
                             double k, std::uint64_t n_runs = 0);

InequalityReport undefined_report(InequalityId id, std::uint64_t n_runs = 0);

constexpr double kDefaultSignificance = 5.0;
constexpr double kExactTolerance = 1e-12;

}  // namespace tbell
