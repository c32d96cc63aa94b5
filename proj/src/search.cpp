#include "tbell/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "parallel.hpp"
#include "tbell/error.hpp"
#include "tbell/inequalities.hpp"

namespace tbell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-6;

struct Partials {
    double d_ab, d_ac, d_bc;
};

// Derivatives of the objective with respect to the three dot products.
Partials dot_partials(Objective kind, double ab, double bc) {
    if (kind == Objective::eq16) return {1.0, -1.0, 1.0};
    return {1.0 + bc, -2.0, 1.0 + ab};
}

Vec3 unit(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

double norm6(const std::array<double, 6>& g) {
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
}

bool near_pole(const TripleConfiguration& c) {
    for (int i = 0; i < 3; ++i)
        if (std::abs(std::sin(c.angles[2 * i])) < kPoleGuard) return true;
    return false;
}

TripleConfiguration from_vectors(const Vec3& a, const Vec3& b, const Vec3& c) {
    TripleConfiguration out;
    const Vec3* v[3] = {&a, &b, &c};
    for (int i = 0; i < 3; ++i) {
        const Vec3& u = *v[i];
        out.angles[2 * i] = std::acos(std::clamp(u[2], -1.0, 1.0));
        out.angles[2 * i + 1] = std::atan2(u[1], u[0]);
    }
    return out;
}

Vec3 rotate(const std::array<Vec3, 3>& rows, const Vec3& v) {
    return {dot3(rows[0], v), dot3(rows[1], v), dot3(rows[2], v)};
}

// Directions close to a pole lose their azimuthal gradient. The objective
// depends only on pairwise dot products, so apply a random global rotation
// to move every direction away from the poles.
TripleConfiguration reseed_away_from_poles(const TripleConfiguration& c, RandomStream& rng) {
    const Directions d = c.directions();
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Direction axis = direction_from_spherical(std::acos(1.0 - 2.0 * rng.uniform()),
                                                        2.0 * kPi * rng.uniform());
        const Frame f = local_frame(axis);
        const std::array<Vec3, 3> rows{f.e1, f.e2, f.e3};
        TripleConfiguration r = from_vectors(rotate(rows, d.a.vec()), rotate(rows, d.b.vec()),
                                             rotate(rows, d.c.vec()));
        if (!near_pole(r)) return r;
    }
    return c;
}

TripleConfiguration random_configuration(RandomStream& rng) {
    TripleConfiguration c;
    for (int i = 0; i < 3; ++i) {
        c.angles[2 * i] = std::acos(1.0 - 2.0 * rng.uniform());
        c.angles[2 * i + 1] = 2.0 * kPi * rng.uniform();
    }
    return c;
}

bool better(const LocalSearchResult& x, const LocalSearchResult& y) {
    if (x.value != y.value) return x.value > y.value;
    return x.best < y.best;
}

}  // namespace

std::string_view objective_name(Objective o) { return o == Objective::eq16 ? "EQ16" : "EQ18"; }

Objective parse_objective(std::string_view text) {
    if (text == "eq16" || text == "EQ16") return Objective::eq16;
    if (text == "eq18" || text == "EQ18") return Objective::eq18;
    throw_invalid("unknown objective '" + std::string(text) + "' (expected eq16 or eq18)");
}

Directions TripleConfiguration::directions() const {
    return {direction_from_spherical(angles[0], angles[1]),
            direction_from_spherical(angles[2], angles[3]),
            direction_from_spherical(angles[4], angles[5])};
}

void validate(const SearchConfig& c) {
    if (c.n_starts < 1) throw_invalid("n_starts must be >= 1");
    if (!(c.step_tolerance > 0.0)) throw_invalid("step_tolerance must be > 0");
    if (c.max_iterations < 1) throw_invalid("max_iterations must be >= 1");
    if (c.workers < 1) throw_invalid("workers must be >= 1");
    if (c.starts.size() > c.n_starts) throw_invalid("more explicit starts than n_starts");
    for (const auto& start : c.starts)
        for (double a : start.angles)
            if (!std::isfinite(a)) throw_invalid("start angles must be finite");
}

double objective(Objective kind, const TripleConfiguration& config) {
    const Directions d = config.directions();
    return kind == Objective::eq16 ? lhs16(d.a, d.b, d.c) : lhs18(d.a, d.b, d.c);
}

std::array<double, 6> gradient(Objective kind, const TripleConfiguration& config) {
    const auto& t = config.angles;
    const Vec3 a = unit(t[0], t[1]), b = unit(t[2], t[3]), c = unit(t[4], t[5]);
    const Partials p = dot_partials(kind, dot3(a, b), dot3(b, c));

    // Gradient with respect to each vector, then chain through the angles.
    std::array<Vec3, 3> g;
    for (int i = 0; i < 3; ++i) {
        g[0][i] = p.d_ab * b[i] + p.d_ac * c[i];
        g[1][i] = p.d_ab * a[i] + p.d_bc * c[i];
        g[2][i] = p.d_ac * a[i] + p.d_bc * b[i];
    }
    std::array<double, 6> out;
    for (int v = 0; v < 3; ++v) {
        const double th = t[2 * v], ph = t[2 * v + 1];
        const Vec3 d_theta{std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)};
        const Vec3 d_phi{-std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0};
        out[2 * v] = dot3(g[v], d_theta);
        out[2 * v + 1] = dot3(g[v], d_phi);
    }
    return out;
}

LocalSearchResult local_ascent(Objective kind, const TripleConfiguration& start,
                               const SearchConfig& config, RandomStream& rng,
                               std::vector<double>* trace) {
    TripleConfiguration x = near_pole(start) ? reseed_away_from_poles(start, rng) : start;
    double fx = objective(kind, x);
    std::array<double, 6> g = gradient(kind, x);
    double gn = norm6(g);

    LocalSearchResult res;
    res.best = x;
    res.value = fx;
    res.gradient_norm = gn;
    if (trace) trace->push_back(res.value);

    std::uint64_t it = 0;
    for (; it < config.max_iterations; ++it) {
        if (gn == 0.0) break;
        double step = 0.5;
        TripleConfiguration trial;
        double ft = fx;
        bool improved = false;
        while (step * gn >= config.step_tolerance) {
            for (int i = 0; i < 6; ++i) trial.angles[i] = x.angles[i] + step * g[i];
            ft = objective(kind, trial);
            if (ft > fx) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        x = trial;
        fx = ft;
        if (near_pole(x)) {
            x = reseed_away_from_poles(x, rng);
            fx = objective(kind, x);
        }
        g = gradient(kind, x);
        gn = norm6(g);
        if (fx > res.value) {
            res.best = x;
            res.value = fx;
            res.gradient_norm = gn;
        }
        if (trace) trace->push_back(res.value);
    }
    res.iterations = it;
    res.budget_exhausted = it >= config.max_iterations;
    return res;
}

SearchResult maximize(const SearchConfig& config) {
    validate(config);
    std::vector<LocalSearchResult> locals(config.n_starts);
    detail::parallel_for(config.n_starts, config.workers, [&](std::size_t s) {
        RandomStream rng = RandomStream::derive(config.seed, 0x5ea5c4, s);
        const TripleConfiguration start =
            s < config.starts.size() ? config.starts[s] : random_configuration(rng);
        locals[s] = local_ascent(config.objective, start, config, rng);
    });
    SearchResult out;
    out.n_starts = config.n_starts;
    const LocalSearchResult* best = &locals.front();
    for (const auto& l : locals) {
        if (better(l, *best)) best = &l;
        out.iterations += l.iterations;
        out.budget_exhausted = out.budget_exhausted || l.budget_exhausted;
    }
    out.best = best->best;
    out.value = best->value;
    out.gradient_norm = best->gradient_norm;
    return out;
}

GridResult grid_oracle(Objective kind, double resolution) {
    if (!(resolution >= 0.005)) throw_invalid("grid resolution must be >= 0.005 rad");
    const auto n_theta = static_cast<std::uint64_t>(std::ceil(kPi / resolution - 1e-9));
    const auto n_phi = static_cast<std::uint64_t>(std::ceil(2.0 * kPi / resolution - 1e-9));

    // a = north pole, phi_b = 0: a.b = cos theta_b, a.c = cos theta_c and
    // b.c = sin tb sin tc cos pc + cos tb cos tc.
    std::vector<double> ct(n_theta + 1), st(n_theta + 1), cp(n_phi);
    for (std::uint64_t i = 0; i <= n_theta; ++i) {
        const double th = kPi * static_cast<double>(i) / static_cast<double>(n_theta);
        ct[i] = std::cos(th);
        st[i] = std::sin(th);
    }
    for (std::uint64_t j = 0; j < n_phi; ++j)
        cp[j] = std::cos(2.0 * kPi * static_cast<double>(j) / static_cast<double>(n_phi));

    GridResult res;
    res.value = -std::numeric_limits<double>::infinity();
    std::uint64_t bi = 0, bk = 0, bj = 0;
    for (std::uint64_t i = 0; i <= n_theta; ++i) {
        for (std::uint64_t k = 0; k <= n_theta; ++k) {
            for (std::uint64_t j = 0; j < n_phi; ++j) {
                const double ab = ct[i];
                const double ac = ct[k];
                const double bc = std::clamp(st[i] * st[k] * cp[j] + ct[i] * ct[k], -1.0, 1.0);
                const double v = kind == Objective::eq16 ? ab - ac + bc
                                                         : ab + bc - 2.0 * ac + ab * bc;
                if (v > res.value) {
                    res.value = v;
                    bi = i;
                    bk = k;
                    bj = j;
                }
            }
        }
    }
    res.evaluations = (n_theta + 1) * (n_theta + 1) * n_phi;
    res.best.angles = {0.0,
                       0.0,
                       kPi * static_cast<double>(bi) / static_cast<double>(n_theta),
                       0.0,
                       kPi * static_cast<double>(bk) / static_cast<double>(n_theta),
                       2.0 * kPi * static_cast<double>(bj) / static_cast<double>(n_phi)};
    return res;
}

TripleConfiguration reference_configuration(Objective kind) {
    TripleConfiguration c;
    // a at the north pole in both cases.
    if (kind == Objective::eq16) c.angles = {0.0, 0.0, kPi / 4, 0.0, 3 * kPi / 4, 0.0};
    else c.angles = {0.0, 0.0, kPi / 4, 0.0, kPi / 2, 0.0};
    return c;
}

// eq18: coplanar with a.b = b.c = 1/3, a.c = -7/9.
double global_maximum(Objective kind) { return kind == Objective::eq16 ? 1.5 : 7.0 / 3.0; }

}  // namespace tbell
