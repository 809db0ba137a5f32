#pragma once

#include <bit>
#include <cstring>
#include <functional>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "measures.hpp"

namespace liouville {

enum class Domain { disk, sphere };

struct DiskSingularity {
    Point2 p;
    double alpha = 0;
};

struct SphereSingularity {
    Point3 p;
    double alpha = 0;
};

inline constexpr Point3 south_pole{0, 0, -1};
inline constexpr Point3 north_pole{0, 0, 1};

struct SingularConfig {
    Domain domain = Domain::disk;
    std::vector<DiskSingularity> disk_points;
    std::vector<SphereSingularity> sphere_points;
    double rho = 1;
    std::function<double(Point2)> h_disk;    // empty means h = 1
    std::function<double(Point3)> h_sphere;

    // one singularity of weight alpha at the origin; alpha = 0 is the regular disk
    static SingularConfig canonical_disk(double alpha, double rho) {
        SingularConfig c;
        c.rho = rho;
        if (alpha != 0) c.disk_points.push_back({{0, 0}, alpha});
        c.validate();
        return c;
    }

    // alpha1 at the south pole (z = 0 in stereographic coordinates), alpha2 at the north pole
    static SingularConfig sphere_poles(double a1, double a2, double rho) {
        SingularConfig c;
        c.domain = Domain::sphere;
        c.rho = rho;
        if (a1 != 0) c.sphere_points.push_back({south_pole, a1});
        if (a2 != 0) c.sphere_points.push_back({north_pole, a2});
        c.validate();
        return c;
    }

    bool canonical() const {
        return domain == Domain::disk && !h_disk &&
               (disk_points.empty() || (disk_points.size() == 1 && disk_points[0].p.x == 0 && disk_points[0].p.y == 0));
    }
    double canonical_alpha() const { return disk_points.empty() ? 0.0 : disk_points[0].alpha; }

    void validate() const {
        if (!(rho > 0) || !std::isfinite(rho)) throw config_error("rho must be positive");
        for (auto& s : disk_points) {
            if (!(s.alpha > 0)) throw config_error("singular weights must be positive");
            if (!(norm(s.p) < 1)) throw config_error("singular point outside the disk");
        }
        for (size_t i = 0; i < sphere_points.size(); ++i) {
            if (!(sphere_points[i].alpha > 0)) throw config_error("singular weights must be positive");
            if (std::abs(dot(sphere_points[i].p, sphere_points[i].p) - 1) > 1e-12)
                throw config_error("singular point not on the unit sphere");
            for (size_t j = 0; j < i; ++j)
                if (geodesic_sphere(sphere_points[i].p, sphere_points[j].p) < 1e-12)
                    throw config_error("singular points must be distinct");
        }
    }
};

// Values at the nodes of a polar grid plus the trace at r = R (H^1_0 fields have zero trace).
struct DiskField {
    PolarGrid grid;
    std::vector<double> values;
    std::vector<double> boundary;

    static DiskField zeros(const PolarGrid& g) { return {g, std::vector<double>(g.size(), 0.0), std::vector<double>(g.n_theta, 0.0)}; }

    template <class F>
    static DiskField sample(const PolarGrid& g, F&& f) {
        DiskField u = zeros(g);
        for (size_t i = 0; i < g.n_r(); ++i)
            for (size_t j = 0; j < g.n_theta; ++j) u.values[g.idx(i, j)] = f(g.node(i, j));
        const double R = g.outer();
        for (size_t j = 0; j < g.n_theta; ++j) {
            double th = g.theta(j);
            u.boundary[j] = f(Point2{R * std::cos(th), R * std::sin(th)});
        }
        return u;
    }

    double at(size_t i, size_t j) const { return values[grid.idx(i, j)]; }
    bool dirichlet(double tol = 1e-12) const {
        for (double b : boundary)
            if (std::abs(b) > tol) return false;
        return true;
    }
    void add_constant(double c) {
        for (auto& v : values) v += c;
        for (auto& v : boundary) v += c;
    }
};

struct SphereField {
    SphereGrid grid;
    std::vector<double> values;

    template <class F>
    static SphereField sample(const SphereGrid& g, F&& f) {
        SphereField u{g, std::vector<double>(g.size())};
        for (size_t i = 0; i < g.n_lat; ++i)
            for (size_t j = 0; j < g.n_lon; ++j) u.values[g.idx(i, j)] = f(g.node(i, j));
        return u;
    }
    void add_constant(double c) {
        for (auto& v : values) v += c;
    }
};

// ---- serialization ----
// binary: int32 tag, int32 d1, int32 d2 (little endian), then float64 payload.
// tag 0: uniform polar disk grid (n_r, n_theta); tag 1: sphere (n_lat, n_lon);
// tag 2: radial cylinder profile (n_nodes, 0) with payload t_first, t_last, values.

enum FieldTag : std::int32_t { tag_disk = 0, tag_sphere = 1, tag_radial = 2 };

namespace detail {

inline void put_i32(std::ostream& os, std::int32_t v) {
    unsigned char b[4];
    auto u = std::uint32_t(v);
    for (int i = 0; i < 4; ++i) b[i] = (u >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_f64(std::ostream& os, double v) {
    auto u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = (u >> (8 * i)) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::int32_t get_i32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw config_error("truncated field header");
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= std::uint32_t(b[i]) << (8 * i);
    return std::int32_t(u);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw config_error("truncated field payload");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    return std::bit_cast<double>(u);
}

inline bool uniform_unit(const PolarGrid& g) {
    const size_t n = g.n_r();
    for (size_t i = 0; i <= n; ++i)
        if (g.edges[i] != double(i) / double(n)) return false;
    return true;
}

}  // namespace detail

inline void write_binary(std::ostream& os, const DiskField& u) {
    if (!detail::uniform_unit(u.grid)) throw config_error("binary disk fields need the uniform unit grid");
    if (!u.dirichlet()) throw config_error("binary disk fields carry no boundary trace; trace must vanish");
    detail::put_i32(os, tag_disk);
    detail::put_i32(os, std::int32_t(u.grid.n_r()));
    detail::put_i32(os, std::int32_t(u.grid.n_theta));
    for (double v : u.values) detail::put_f64(os, v);
}

inline void write_binary(std::ostream& os, const SphereField& u) {
    detail::put_i32(os, tag_sphere);
    detail::put_i32(os, std::int32_t(u.grid.n_lat));
    detail::put_i32(os, std::int32_t(u.grid.n_lon));
    for (double v : u.values) detail::put_f64(os, v);
}

inline void write_binary_radial(std::ostream& os, const std::vector<double>& t, const std::vector<double>& u) {
    if (t.size() != u.size() || t.size() < 2) throw config_error("radial profile size mismatch");
    detail::put_i32(os, tag_radial);
    detail::put_i32(os, std::int32_t(u.size()));
    detail::put_i32(os, 0);
    detail::put_f64(os, t.front());
    detail::put_f64(os, t.back());
    for (double v : u) detail::put_f64(os, v);
}

struct AnyField {
    FieldTag tag = tag_disk;
    DiskField disk;
    SphereField sphere;
    std::vector<double> t, radial;
};

inline AnyField read_binary(std::istream& is) {
    AnyField f;
    auto tag = detail::get_i32(is);
    auto d1 = detail::get_i32(is), d2 = detail::get_i32(is);
    if (d1 < 0 || d2 < 0 || std::int64_t(d1) * std::int64_t(std::max(d2, 1)) > (std::int64_t(1) << 30))
        throw config_error("bad field dimensions");
    switch (tag) {
        case tag_disk: {
            if (d1 < 1 || d2 < 1) throw config_error("bad field dimensions");
            f.tag = tag_disk;
            f.disk = DiskField::zeros(PolarGrid::uniform(size_t(d1), size_t(d2)));
            for (auto& v : f.disk.values) v = detail::get_f64(is);
            break;
        }
        case tag_sphere: {
            if (d1 < 1 || d2 < 1) throw config_error("bad field dimensions");
            f.tag = tag_sphere;
            f.sphere = {SphereGrid::make(size_t(d1), size_t(d2)), std::vector<double>(size_t(d1) * size_t(d2))};
            for (auto& v : f.sphere.values) v = detail::get_f64(is);
            break;
        }
        case tag_radial: {
            if (d1 < 2) throw config_error("bad field dimensions");
            f.tag = tag_radial;
            double a = detail::get_f64(is), b = detail::get_f64(is);
            f.t.resize(size_t(d1));
            f.radial.resize(size_t(d1));
            for (int i = 0; i < d1; ++i) f.t[i] = a + (b - a) * double(i) / double(d1 - 1);
            for (auto& v : f.radial) v = detail::get_f64(is);
            break;
        }
        default: throw config_error("unknown field tag");
    }
    return f;
}

using json = nlohmann::ordered_json;

inline json to_json(const DiskField& u) {
    return json{{"domain", "disk"},     {"edges", u.grid.edges},   {"n_theta", u.grid.n_theta},
                {"values", u.values},   {"boundary", u.boundary}};
}

inline json to_json(const SphereField& u) {
    return json{{"domain", "sphere"}, {"n_lat", u.grid.n_lat}, {"n_lon", u.grid.n_lon}, {"values", u.values}};
}

inline DiskField disk_field_from_json(const json& j) {
    if (j.value("domain", "") != "disk") throw config_error("expected a disk field");
    DiskField u;
    u.grid.edges = j.at("edges").get<std::vector<double>>();
    u.grid.n_theta = j.at("n_theta").get<size_t>();
    if (u.grid.edges.size() < 2 || u.grid.n_theta < 1) throw config_error("bad disk grid");
    for (size_t i = 1; i < u.grid.edges.size(); ++i)
        if (!(u.grid.edges[i] > u.grid.edges[i - 1])) throw config_error("grid edges must increase");
    if (u.grid.edges.front() != 0 || u.grid.edges.back() > 1) throw config_error("grid must cover [0, R], R <= 1");
    u.values = j.at("values").get<std::vector<double>>();
    u.boundary = j.contains("boundary") ? j.at("boundary").get<std::vector<double>>()
                                        : std::vector<double>(u.grid.n_theta, 0.0);
    if (u.values.size() != u.grid.size() || u.boundary.size() != u.grid.n_theta)
        throw config_error("field size does not match grid");
    return u;
}

inline SphereField sphere_field_from_json(const json& j) {
    if (j.value("domain", "") != "sphere") throw config_error("expected a sphere field");
    SphereField u;
    u.grid = SphereGrid::make(j.at("n_lat").get<size_t>(), j.at("n_lon").get<size_t>());
    u.values = j.at("values").get<std::vector<double>>();
    if (u.values.size() != u.grid.size() || u.grid.size() == 0) throw config_error("field size does not match grid");
    return u;
}

// Disk densities in JSON: {"edges": [...], "n_theta": n, "cell_masses": [...]} or a sampled field of values per area.
inline DiskDensity disk_density_from_json(const json& j) {
    PolarGrid g;
    g.edges = j.at("edges").get<std::vector<double>>();
    g.n_theta = j.at("n_theta").get<size_t>();
    if (g.edges.size() < 2 || g.n_theta < 1 || g.edges.front() != 0 || g.edges.back() > 1)
        throw config_error("bad disk grid");
    for (size_t i = 1; i < g.edges.size(); ++i)
        if (!(g.edges[i] > g.edges[i - 1])) throw config_error("grid edges must increase");
    std::vector<double> m;
    if (j.contains("cell_masses")) {
        m = j.at("cell_masses").get<std::vector<double>>();
    } else {
        auto v = j.at("values").get<std::vector<double>>();
        if (v.size() != g.size()) throw config_error("density size does not match grid");
        m.resize(g.size());
        for (size_t i = 0; i < g.n_r(); ++i)
            for (size_t k = 0; k < g.n_theta; ++k) m[g.idx(i, k)] = v[g.idx(i, k)] * g.cell_area(i);
    }
    if (m.size() != g.size()) throw config_error("density size does not match grid");
    for (double x : m)
        if (!(x >= 0) || !std::isfinite(x)) throw config_error("density must be finite and nonnegative");
    auto d = DiskDensity::from_cell_masses(g, m);
    d.normalize();
    return d;
}

inline json to_json(const DiskDensity& f) {
    std::vector<double> m(f.values.size());
    for (size_t c = 0; c < m.size(); ++c) m[c] = f.cell_mass(c);
    return json{{"edges", f.grid.edges}, {"n_theta", f.grid.n_theta}, {"cell_masses", m}};
}

}  // namespace liouville
