#include "tbell/report.hpp"

namespace tbell {

std::string_view inequality_name(InequalityId id) {
    switch (id) {
        case InequalityId::EQ4: return "EQ4";
        case InequalityId::EQ6: return "EQ6";
        case InequalityId::EQ7: return "EQ7";
        case InequalityId::EQ8: return "EQ8";
        case InequalityId::EQ10: return "EQ10";
        case InequalityId::EQ16: return "EQ16";
        case InequalityId::EQ18: return "EQ18";
    }
    return "?";
}

InequalityReport make_report(InequalityId id, double lhs, double rhs, double stderr_margin,
                             double k, std::uint64_t n_runs) {
    InequalityReport r;
    r.id = id;
    r.defined = true;
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.stderr_margin = stderr_margin;
    r.n_runs = n_runs;
    if (stderr_margin > 0.0) {
        r.n_sigma = r.margin / stderr_margin;
        r.violated = r.margin < -k * stderr_margin;
    } else {
        r.violated = r.margin < -kExactTolerance;
    }
    return r;
}

InequalityReport undefined_report(InequalityId id, std::uint64_t n_runs) {
    InequalityReport r;
    r.id = id;
    r.n_runs = n_runs;
    return r;
}

}  // namespace tbell
