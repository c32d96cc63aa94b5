#pragma once

#include <array>
#include <complex>
#include <cstdint>

#include "tbell/rng.hpp"

namespace tbell {

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& u, const Vec3& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

inline Vec3 cross3(const Vec3& u, const Vec3& v) {
    return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0]};
}

/// Unit 3-vector used as a measurement setting or a reference axis.
///
/// Construction accepts vectors within 1e-9 of unit norm and rescales them;
/// anything further from the sphere, or non-finite, is rejected.
class Direction {
public:
    /// The +z axis.
    Direction() : v_{0.0, 0.0, 1.0} {}

    static Direction from_xyz(double x, double y, double z);
    static Direction from_vec(const Vec3& v) { return from_xyz(v[0], v[1], v[2]); }

    double x() const { return v_[0]; }
    double y() const { return v_[1]; }
    double z() const { return v_[2]; }
    const Vec3& vec() const { return v_; }

    Direction operator-() const { return Direction(Vec3{-v_[0], -v_[1], -v_[2]}); }
    bool operator==(const Direction&) const = default;

private:
    explicit Direction(const Vec3& v) : v_(v) {}
    Vec3 v_;
};

/// Dichotomic measurement result.
enum class Outcome : std::int8_t { plus = 1, minus = -1 };

constexpr int sign(Outcome o) { return static_cast<int>(o); }
constexpr Outcome flip(Outcome o) { return o == Outcome::plus ? Outcome::minus : Outcome::plus; }
constexpr Outcome outcome_from_sign(int s) { return s >= 0 ? Outcome::plus : Outcome::minus; }

/// Right-handed orthonormal frame (e1, e2, e) attached to a reference axis.
/// The transverse pair is the image of (x, y) under the minimal rotation
/// taking +z to e; for e = -z it is (x, -y).
struct Frame {
    Vec3 e1;
    Vec3 e2;
    Vec3 e3;
};

Frame local_frame(const Direction& e);

/// Pure two-level state  s|e+> + sqrt(1 - s^2) exp(i phi) |e->.
///
/// Global phase is not represented. `phi` is wrapped into [0, 2 pi).
class PureState {
public:
    PureState() = default;
    PureState(double s, double phi, const Direction& e = Direction());

    double s() const { return s_; }
    double phi() const { return phi_; }
    const Direction& axis() const { return e_; }

    /// Amplitudes on (|e+>, |e->).
    std::array<std::complex<double>, 2> amplitudes() const;

    bool operator==(const PureState&) const = default;

private:
    double s_ = 1.0;
    double phi_ = 0.0;
    Direction e_;
};

Direction direction_from_spherical(double theta, double phi);

/// Scalar product clamped to [-1, 1].
double dot(const Direction& d1, const Direction& d2);

/// Eigenstate of the dichotomic observable along `x`, written against axis
/// `e` with amplitudes sqrt((1 +- x.e)/2) and relative phase `phase` (the
/// -1 eigenstate carries the extra minus sign on its |e-> component).
/// Different phases give eigenstates of directions rotated about `e`.
PureState eigenstate(const Direction& x, Outcome outcome, const Direction& e, double phase);

/// Eigenstate whose Bloch vector is exactly `sign(outcome) * x`; the phase
/// is the azimuth of `x` in local_frame(e).
PureState eigenstate(const Direction& x, Outcome outcome, const Direction& e = Direction());

Vec3 bloch_vector(const PureState& state);

/// Same physical state written against a different reference axis.
PureState reexpress(const PureState& state, const Direction& e);

/// State with the given Bloch vector, written against `e`.
PureState state_from_bloch(const Vec3& r, const Direction& e = Direction());

double born_prob(const PureState& state, const Direction& x, Outcome outcome);

/// Projective update onto the `outcome` eigenstate of `x`, stored against +z.
/// Throws if the outcome has zero probability.
PureState collapse(const PureState& state, const Direction& x, Outcome outcome);

struct Measurement {
    Outcome outcome;
    PureState state;
};

Measurement measure(const PureState& state, const Direction& x, RandomStream& rng);

/// Uniform on the sphere.
Direction random_direction(RandomStream& rng);

/// Uniformly distributed Bloch vector, written against a random axis with
/// a random relative phase convention.
PureState random_state(RandomStream& rng);

}  // namespace tbell
