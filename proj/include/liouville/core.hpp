#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace liouville {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr const char* version = "0.3.1";

// exit-code classes used by the CLI: 1 config, 2 computation, 3 verification
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct compute_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct verify_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double canonical_angle(double th) {
    double a = std::fmod(th, two_pi);
    if (a < 0) a += two_pi;
    if (a >= two_pi) a = 0.0;
    return a;
}

// signed distance a-b folded to (-pi, pi]
inline double angle_diff(double a, double b) {
    double d = std::remainder(a - b, two_pi);
    return d;
}

inline double geodesic_circle(double a, double b) { return std::abs(angle_diff(a, b)); }

struct Point2 {
    double x = 0, y = 0;
};

inline double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

struct Point3 {
    double x = 0, y = 0, z = 0;
};

inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// colatitude in [0,pi], longitude in [0,2pi)
inline Point3 sphere_point(double colat, double lon) {
    return {std::sin(colat) * std::cos(lon), std::sin(colat) * std::sin(lon), std::cos(colat)};
}

inline double geodesic_sphere(Point3 a, Point3 b) {
    double c = std::clamp(dot(a, b), -1.0, 1.0);
    // atan2 form keeps accuracy for nearly coincident points
    double cx = a.y * b.z - a.z * b.y, cy = a.z * b.x - a.x * b.z, cz = a.x * b.y - a.y * b.x;
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), c);
}

// Portable uniform doubles: the bit recipe does not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

// Halton radical inverse in base b
inline double radical_inverse(std::uint64_t i, unsigned b) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= b;
        r += f * double(i % b);
        i /= b;
    }
    return r;
}

inline constexpr unsigned small_primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Accumulates log(sum exp(a_i)) without overflow.
class LogSum {
public:
    void add(double a) {
        if (a == -INFINITY) return;
        if (a <= m_) {
            s_ += std::exp(a - m_);
        } else {
            s_ = s_ * std::exp(m_ - a) + 1.0;
            m_ = a;
        }
    }
    double value() const { return s_ > 0 ? m_ + std::log(s_) : -INFINITY; }

private:
    double m_ = -INFINITY, s_ = 0.0;
};

// Quintic smoothstep: 1 on [0,a], 0 on [b,inf)
inline double smooth_cut(double r, double a, double b) {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    double x = (r - a) / (b - a);
    return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

inline double smooth_cut_d(double r, double a, double b) {
    if (r <= a || r >= b) return 0.0;
    double x = (r - a) / (b - a);
    return -30.0 * x * x * (1.0 - x) * (1.0 - x) / (b - a);
}

}  // namespace liouville
