#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"
#include "transport.hpp"

namespace liouville {

// Atoms, or masses on a uniform angular grid with bin j centred at j*2pi/n.
struct CircleMeasure {
    std::vector<CircleAtom> atoms;
    std::vector<double> bins;

    bool gridded() const { return !bins.empty(); }
    size_t n_bins() const { return bins.size(); }
    double bin_angle(size_t j) const { return two_pi * double(j) / double(bins.size()); }

    double mass() const {
        double s = 0;
        for (auto& a : atoms) s += a.w;
        for (double b : bins) s += b;
        return s;
    }

    std::vector<CircleAtom> as_atoms() const {
        if (!gridded()) return atoms;
        std::vector<CircleAtom> out;
        out.reserve(bins.size());
        for (size_t j = 0; j < bins.size(); ++j)
            if (bins[j] != 0) out.push_back({bin_angle(j), bins[j]});
        return out;
    }

    static CircleMeasure from_atoms(std::vector<CircleAtom> a) {
        CircleMeasure m;
        for (auto& x : a) {
            if (x.w < 0) throw config_error("negative circle weight");
            x.theta = canonical_angle(x.theta);
        }
        m.atoms = std::move(a);
        return m;
    }

    static CircleMeasure uniform(size_t n) {
        CircleMeasure m;
        m.bins.assign(n, 1.0 / double(n));
        return m;
    }

    CircleMeasure rotated(double phi) const {
        CircleMeasure m = *this;
        if (gridded()) {
            // only exact for multiples of the bin width
            long s = std::lround(phi / (two_pi / double(bins.size())));
            long n = long(bins.size());
            for (long j = 0; j < n; ++j) m.bins[((j + s) % n + n) % n] = bins[j];
        } else {
            for (auto& a : m.atoms) a.theta = canonical_angle(a.theta + phi);
        }
        return m;
    }
};

// Polar grid on B_R, R <= 1. Radial cells [e_i, e_{i+1}], node at the midpoint,
// so for uniform cells the innermost node sits at h_r/2. Angular node j at j*dtheta.
struct PolarGrid {
    std::vector<double> edges;
    size_t n_theta = 0;

    static PolarGrid uniform(size_t n_r, size_t n_theta, double R = 1.0) {
        PolarGrid g;
        g.n_theta = n_theta;
        g.edges.resize(n_r + 1);
        for (size_t i = 0; i <= n_r; ++i) g.edges[i] = R * double(i) / double(n_r);
        return g;
    }

    // geometric radial cells from r_min to R plus the inner disk [0, r_min]
    static PolarGrid log_radial(double r_min, double R, size_t cells_per_octave, size_t n_theta) {
        if (!(r_min > 0 && r_min < R)) throw config_error("log grid needs 0 < r_min < R");
        PolarGrid g;
        g.n_theta = n_theta;
        double oct = std::log2(R / r_min);
        size_t n = size_t(std::ceil(oct * double(cells_per_octave) - 1e-9));
        g.edges.push_back(0.0);
        for (size_t i = 0; i <= n; ++i)
            g.edges.push_back(R * std::exp2(-double(n - i) / double(cells_per_octave)));
        return g;
    }

    size_t n_r() const { return edges.size() - 1; }
    size_t size() const { return n_r() * n_theta; }
    double outer() const { return edges.back(); }
    double dtheta() const { return two_pi / double(n_theta); }
    double r(size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
    double theta(size_t j) const { return dtheta() * double(j); }
    size_t idx(size_t i, size_t j) const { return i * n_theta + j; }
    Point2 node(size_t i, size_t j) const {
        double rr = r(i), th = theta(j);
        return {rr * std::cos(th), rr * std::sin(th)};
    }
    double cell_area(size_t i) const {
        return 0.5 * (edges[i + 1] * edges[i + 1] - edges[i] * edges[i]) * dtheta();
    }
    // int_cell |x|^{2a} dx, exact
    double cell_weighted_area(size_t i, double a) const {
        double p = 2.0 * a + 2.0;
        return (std::pow(edges[i + 1], p) - std::pow(edges[i], p)) / p * dtheta();
    }
    bool operator==(const PolarGrid&) const = default;
};

// Density per unit area on a polar grid; cell mass = values[c] * weights[c].
struct DiskDensity {
    PolarGrid grid;
    std::vector<double> values;
    std::vector<double> weights;

    double mass() const {
        double s = 0;
        for (size_t c = 0; c < values.size(); ++c) s += values[c] * weights[c];
        return s;
    }
    double cell_mass(size_t c) const { return values[c] * weights[c]; }

    static DiskDensity from_cell_masses(const PolarGrid& g, const std::vector<double>& m) {
        DiskDensity d;
        d.grid = g;
        d.values.resize(g.size());
        d.weights.resize(g.size());
        for (size_t i = 0; i < g.n_r(); ++i)
            for (size_t j = 0; j < g.n_theta; ++j) {
                size_t c = g.idx(i, j);
                d.weights[c] = g.cell_area(i);
                d.values[c] = m[c] / d.weights[c];
            }
        return d;
    }

    void normalize() {
        double s = mass();
        if (!(s > 0) || !std::isfinite(s)) throw compute_error("density has no positive finite mass");
        for (auto& v : values) v /= s;
    }

    // lumped representation: one atom per cell at the node
    std::vector<Atom2> atoms() const {
        std::vector<Atom2> out;
        out.reserve(values.size());
        for (size_t i = 0; i < grid.n_r(); ++i)
            for (size_t j = 0; j < grid.n_theta; ++j) {
                double w = cell_mass(grid.idx(i, j));
                if (w > 0) out.push_back({grid.node(i, j), w});
            }
        return out;
    }
};

// Colatitude cells uniform on (0, pi) so the poles are never nodes; longitude node j at j*dphi.
struct SphereGrid {
    size_t n_lat = 0, n_lon = 0;

    static SphereGrid make(size_t n_lat, size_t n_lon) { return {n_lat, n_lon}; }
    size_t size() const { return n_lat * n_lon; }
    double dcolat() const { return pi / double(n_lat); }
    double dlon() const { return two_pi / double(n_lon); }
    double colat(size_t i) const { return (double(i) + 0.5) * dcolat(); }
    double lon(size_t j) const { return double(j) * dlon(); }
    size_t idx(size_t i, size_t j) const { return i * n_lon + j; }
    Point3 node(size_t i, size_t j) const { return sphere_point(colat(i), lon(j)); }
    double cell_area(size_t i) const {
        return (std::cos(double(i) * dcolat()) - std::cos(double(i + 1) * dcolat())) * dlon();
    }
    bool operator==(const SphereGrid&) const = default;
};

struct SphereDensity {
    SphereGrid grid;
    std::vector<double> values;
    std::vector<double> weights;

    double mass() const {
        double s = 0;
        for (size_t c = 0; c < values.size(); ++c) s += values[c] * weights[c];
        return s;
    }
    double cell_mass(size_t c) const { return values[c] * weights[c]; }

    static SphereDensity from_values(const SphereGrid& g, std::vector<double> v) {
        SphereDensity d;
        d.grid = g;
        d.values = std::move(v);
        d.weights.resize(g.size());
        for (size_t i = 0; i < g.n_lat; ++i)
            for (size_t j = 0; j < g.n_lon; ++j) d.weights[g.idx(i, j)] = g.cell_area(i);
        return d;
    }

    void normalize() {
        double s = mass();
        if (!(s > 0) || !std::isfinite(s)) throw compute_error("density has no positive finite mass");
        for (auto& v : values) v /= s;
    }
};

namespace detail {
inline void check_prob(double m1, double m2) {
    if (std::abs(m1 - 1.0) > 1e-8 || std::abs(m2 - 1.0) > 1e-8)
        throw config_error("not probability measures");
}
}  // namespace detail

inline double kr_distance(const CircleMeasure& a, const CircleMeasure& b) {
    detail::check_prob(a.mass(), b.mass());
    return circle_w1(a.as_atoms(), b.as_atoms());
}

inline double kr_distance(const std::vector<Atom2>& a, const std::vector<Atom2>& b) {
    double ma = 0, mb = 0;
    for (auto& x : a) ma += x.w;
    for (auto& x : b) mb += x.w;
    detail::check_prob(ma, mb);
    return transport_cost(aggregate_atoms(a), aggregate_atoms(b));
}

inline double kr_distance(const DiskDensity& a, const DiskDensity& b) {
    return kr_distance(a.atoms(), b.atoms());
}

inline double kr_distance(const DiskDensity& a, const std::vector<Atom2>& b) {
    return kr_distance(a.atoms(), b);
}

inline CircleMeasure angular_pushforward(const DiskDensity& f) {
    const auto& g = f.grid;
    CircleMeasure m;
    m.bins.assign(g.n_theta, 0.0);
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) m.bins[j] += f.cell_mass(g.idx(i, j));
    double s = std::accumulate(m.bins.begin(), m.bins.end(), 0.0);
    if (s > 0)
        for (auto& b : m.bins) b /= s;
    return m;
}

inline CircleMeasure meridian_pushforward(const SphereDensity& f) {
    const auto& g = f.grid;
    CircleMeasure m;
    m.bins.assign(g.n_lon, 0.0);
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) m.bins[j] += f.cell_mass(g.idx(i, j));
    double s = std::accumulate(m.bins.begin(), m.bins.end(), 0.0);
    if (s > 0)
        for (auto& b : m.bins) b /= s;
    return m;
}

}  // namespace liouville
