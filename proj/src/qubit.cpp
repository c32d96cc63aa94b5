#include "tbell/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tbell/error.hpp"

namespace tbell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Unit-norm acceptance band for constructed directions.
constexpr double kRenormBand = 1e-9;
// Probabilities this close to 0 or 1 are snapped, so eigenstates measured
// along their own axis are exactly repeatable.
constexpr double kSnap = 1e-12;

double wrap_phase(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

double azimuth_in(const Frame& f, const Vec3& v) {
    const double u = dot3(v, f.e1);
    const double w = dot3(v, f.e2);
    if (u * u + w * w < 1e-30) return 0.0;
    return std::atan2(w, u);
}

}  // namespace

Direction Direction::from_xyz(double x, double y, double z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
        throw_invalid("direction has non-finite component");
    const double n2 = x * x + y * y + z * z;
    const double n = std::sqrt(n2);
    if (std::abs(n - 1.0) > kRenormBand)
        throw_invalid("direction is not a unit vector (norm " + std::to_string(n) + ")");
    // Leave already-unit input bit-exact so text round trips are stable.
    if (std::abs(n2 - 1.0) > 1e-14) return Direction(Vec3{x / n, y / n, z / n});
    return Direction(Vec3{x, y, z});
}

Frame local_frame(const Direction& e) {
    const double ex = e.x(), ey = e.y(), ez = e.z();
    const double t2 = ex * ex + ey * ey;
    if (t2 < 1e-24) {
        if (ez > 0.0) return {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, e.vec()};
        return {{1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, e.vec()};
    }
    // Minimal rotation z -> e applied to x; ex^2/(1+ez) rewritten stably.
    const double f = (1.0 - ez) / t2;
    Vec3 e1{1.0 - f * ex * ex, -f * ex * ey, -ex};
    const double n = std::sqrt(dot3(e1, e1));
    e1 = {e1[0] / n, e1[1] / n, e1[2] / n};
    return {e1, cross3(e.vec(), e1), e.vec()};
}

PureState::PureState(double s, double phi, const Direction& e) : e_(e) {
    if (!std::isfinite(s) || !std::isfinite(phi)) throw_invalid("state parameters must be finite");
    if (s < 0.0 || s > 1.0) throw_invalid("state amplitude s must lie in [0, 1]");
    s_ = s;
    phi_ = wrap_phase(phi);
}

std::array<std::complex<double>, 2> PureState::amplitudes() const {
    const double c = std::sqrt(std::max(0.0, 1.0 - s_ * s_));
    return {std::complex<double>(s_, 0.0), std::polar(c, phi_)};
}

Direction direction_from_spherical(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi))
        throw_invalid("spherical angles must be finite");
    const double st = std::sin(theta);
    return Direction::from_xyz(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
}

double dot(const Direction& d1, const Direction& d2) {
    return std::clamp(dot3(d1.vec(), d2.vec()), -1.0, 1.0);
}

PureState eigenstate(const Direction& x, Outcome outcome, const Direction& e, double phase) {
    const double c = dot(x, e);
    if (outcome == Outcome::plus) return PureState(std::sqrt((1.0 + c) / 2.0), phase, e);
    return PureState(std::sqrt((1.0 - c) / 2.0), phase + std::numbers::pi, e);
}

PureState eigenstate(const Direction& x, Outcome outcome, const Direction& e) {
    return eigenstate(x, outcome, e, azimuth_in(local_frame(e), x.vec()));
}

Vec3 bloch_vector(const PureState& state) {
    const Frame f = local_frame(state.axis());
    const double s = state.s();
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    const double t = 2.0 * s * c;
    const double l = 2.0 * s * s - 1.0;
    const double cp = t * std::cos(state.phi());
    const double sp = t * std::sin(state.phi());
    Vec3 r;
    for (int i = 0; i < 3; ++i) r[i] = cp * f.e1[i] + sp * f.e2[i] + l * f.e3[i];
    return r;
}

PureState state_from_bloch(const Vec3& r, const Direction& e) {
    const Direction rd = Direction::from_vec(r);
    return eigenstate(rd, Outcome::plus, e);
}

PureState reexpress(const PureState& state, const Direction& e) {
    return state_from_bloch(bloch_vector(state), e);
}

double born_prob(const PureState& state, const Direction& x, Outcome outcome) {
    double d = std::clamp(dot3(bloch_vector(state), x.vec()), -1.0, 1.0);
    if (d > 1.0 - kSnap) d = 1.0;
    if (d < -1.0 + kSnap) d = -1.0;
    return (1.0 + sign(outcome) * d) / 2.0;
}

PureState collapse(const PureState& state, const Direction& x, Outcome outcome) {
    if (born_prob(state, x, outcome) <= 0.0)
        throw_invalid("collapse onto a zero-probability outcome");
    return eigenstate(x, outcome);
}

Measurement measure(const PureState& state, const Direction& x, RandomStream& rng) {
    const double p_plus = born_prob(state, x, Outcome::plus);
    const Outcome o = rng.uniform() < p_plus ? Outcome::plus : Outcome::minus;
    return {o, eigenstate(x, o)};
}

Direction random_direction(RandomStream& rng) {
    return direction_from_spherical(std::acos(1.0 - 2.0 * rng.uniform()), kTwoPi * rng.uniform());
}

PureState random_state(RandomStream& rng) {
    const Direction axis = random_direction(rng);
    const double s2 = rng.uniform();
    return PureState(std::sqrt(s2), kTwoPi * rng.uniform(), axis);
}

}  // namespace tbell
