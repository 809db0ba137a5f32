#pragma once

#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "barycenters.hpp"
#include "core.hpp"
#include "fields.hpp"
#include "measures.hpp"
#include "transport.hpp"

namespace liouville {

// ---- Green functions and weights ----

// -Delta G = delta_p in B, G = 0 on the unit circle
inline double green_disk(Point2 p, Point2 x) {
    double dx = x.x - p.x, dy = x.y - p.y;
    double d = std::hypot(dx, dy);
    if (d == 0) throw config_error("pole");
    // |1 - conj(p) x|
    double re = 1 - (p.x * x.x + p.y * x.y), im = -(p.x * x.y - p.y * x.x);
    return std::log(std::hypot(re, im) / d) / two_pi;
}

// zero-mean Green function of the round unit sphere with pole p
inline double green_sphere(Point3 p, Point3 x) {
    double d = geodesic_sphere(p, x);
    if (d == 0) throw config_error("pole");
    double s = std::sin(0.5 * d);
    return -(std::log(2 * s * s) + std::log(std::numbers::e / 2)) / (4 * pi);
}

inline double green_sphere(Point3 x) { return green_sphere(south_pole, x); }

inline double log_singular_weight(const SingularConfig& cfg, Point2 x) {
    double l = 0;
    for (auto& s : cfg.disk_points) {
        double d = dist(x, s.p);
        if (d == 0) return -INFINITY;
        l -= 4 * pi * s.alpha * green_disk(s.p, x);
    }
    if (cfg.h_disk) l += std::log(cfg.h_disk(x));
    return l;
}

inline double log_singular_weight(const SingularConfig& cfg, Point3 x) {
    double l = 0;
    for (auto& s : cfg.sphere_points) {
        double d = geodesic_sphere(s.p, x);
        if (d == 0) return -INFINITY;
        l -= 4 * pi * s.alpha * green_sphere(s.p, x);
    }
    if (cfg.h_sphere) l += std::log(cfg.h_sphere(x));
    return l;
}

inline double singular_weight(const SingularConfig& cfg, Point2 x) { return std::exp(log_singular_weight(cfg, x)); }
inline double singular_weight(const SingularConfig& cfg, Point3 x) { return std::exp(log_singular_weight(cfg, x)); }

// log of int_cell h~ dx, exact in r for the canonical weight |x|^{2 alpha}
inline double log_cell_weight(const SingularConfig& cfg, const PolarGrid& g, size_t i, size_t j) {
    if (cfg.canonical()) return std::log(g.cell_weighted_area(i, cfg.canonical_alpha()));
    return log_singular_weight(cfg, g.node(i, j)) + std::log(g.cell_area(i));
}

// ---- grid functionals ----

inline double dirichlet_energy(const DiskField& u) {
    const auto& g = u.grid;
    const size_t n = g.n_r(), m = g.n_theta;
    const double dth = g.dtheta();
    double e = 0;
    for (size_t i = 0; i < n; ++i) {
        double ri = g.r(i), w = g.edges[i + 1] - g.edges[i];
        for (size_t j = 0; j < m; ++j) {
            double d = u.at(i, (j + 1) % m) - u.at(i, j);
            e += d * d * w / (ri * dth);
        }
        double rn = i + 1 < n ? g.r(i + 1) : g.outer();
        for (size_t j = 0; j < m; ++j) {
            double d = (i + 1 < n ? u.at(i + 1, j) : u.boundary[j]) - u.at(i, j);
            e += d * d * g.edges[i + 1] * dth / (rn - ri);
        }
    }
    return e;
}

inline double dirichlet_energy(const SphereField& u) {
    const auto& g = u.grid;
    const double dt = g.dcolat(), dp = g.dlon();
    double e = 0;
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) {
            double a = u.values[g.idx(i, j)];
            double b = u.values[g.idx(i, (j + 1) % g.n_lon)];
            e += (b - a) * (b - a) * dt / (std::sin(g.colat(i)) * dp);
            if (i + 1 < g.n_lat) {
                double c = u.values[g.idx(i + 1, j)];
                e += (c - a) * (c - a) * std::sin(double(i + 1) * dt) * dp / dt;
            }
        }
    return e;
}

struct DiskConformal {
    DiskDensity density;  // normalized f~_u
    double log_mass = 0;  // log int h~ e^{2u}
};

inline DiskConformal conformal_density(const DiskField& u, const SingularConfig& cfg) {
    const auto& g = u.grid;
    std::vector<double> lm(g.size());
    LogSum ls;
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) {
            size_t c = g.idx(i, j);
            if (!std::isfinite(u.values[c]) && u.values[c] != -INFINITY) throw compute_error("non-finite field value");
            lm[c] = log_cell_weight(cfg, g, i, j) + 2 * u.values[c];
            ls.add(lm[c]);
        }
    double L = ls.value();
    if (!std::isfinite(L)) throw compute_error("conformal density has zero mass");
    std::vector<double> m(g.size());
    for (size_t c = 0; c < m.size(); ++c) m[c] = std::exp(lm[c] - L);
    return {DiskDensity::from_cell_masses(g, m), L};
}

struct SphereConformal {
    SphereDensity density;
    double log_mass = 0;
};

inline SphereConformal conformal_density(const SphereField& u, const SingularConfig& cfg) {
    const auto& g = u.grid;
    std::vector<double> lm(g.size());
    LogSum ls;
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) {
            size_t c = g.idx(i, j);
            if (!std::isfinite(u.values[c]) && u.values[c] != -INFINITY) throw compute_error("non-finite field value");
            lm[c] = log_singular_weight(cfg, g.node(i, j)) + std::log(g.cell_area(i)) + 2 * u.values[c];
            ls.add(lm[c]);
        }
    double L = ls.value();
    if (!std::isfinite(L)) throw compute_error("conformal density has zero mass");
    std::vector<double> v(g.size());
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) v[g.idx(i, j)] = std::exp(lm[g.idx(i, j)] - L) / g.cell_area(i);
    return {SphereDensity::from_values(g, std::move(v)), L};
}

// disk: int |grad u|^2 - rho log int h~ e^{2u}; u must vanish on the boundary
inline double functional_I(const DiskField& u, const SingularConfig& cfg) {
    if (cfg.domain != Domain::disk) throw config_error("disk field with a sphere configuration");
    if (!u.dirichlet()) throw config_error("disk fields must vanish on the boundary");
    double v = dirichlet_energy(u) - cfg.rho * conformal_density(u, cfg).log_mass;
    if (!std::isfinite(v)) throw compute_error("functional is not finite");
    return v;
}

// sphere: int |grad u|^2 + 2 (rho/|S|) int u - rho log int h~ e^{2u}
inline double functional_I(const SphereField& u, const SingularConfig& cfg) {
    if (cfg.domain != Domain::sphere) throw config_error("sphere field with a disk configuration");
    const auto& g = u.grid;
    double mean = 0;
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) mean += g.cell_area(i) * u.values[g.idx(i, j)];
    double v = dirichlet_energy(u) + 2 * cfg.rho / (4 * pi) * mean - cfg.rho * conformal_density(u, cfg).log_mass;
    if (!std::isfinite(v)) throw compute_error("functional is not finite");
    return v;
}

// log int e^{2(u - mean u)} - (1/4pi) int |grad u|^2 on the round sphere (at most log 4pi)
inline double moser_trudinger_gap(const SphereField& u) {
    const auto& g = u.grid;
    double mean = 0;
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) mean += g.cell_area(i) * u.values[g.idx(i, j)];
    mean /= 4 * pi;
    LogSum ls;
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) ls.add(std::log(g.cell_area(i)) + 2 * (u.values[g.idx(i, j)] - mean));
    return ls.value() - dirichlet_energy(u) / (4 * pi);
}

// ---- analytic fields and adaptive quadrature on the disk ----

struct Peak {
    Point2 c;
    double scale = 1;
};

struct DiskFunction {
    std::function<double(Point2)> value;
    std::function<Point2(Point2)> grad;
    std::vector<Peak> peaks;
    // optional evaluation at peaks[i].c + offset, for peak scales below the spacing of doubles near c
    std::function<double(size_t, Point2)> value_near;
    std::function<Point2(size_t, Point2)> grad_near;
};

inline double bubble_value(double lambda, Point2 x0, Point2 y) {
    double d2 = (y.x - x0.x) * (y.x - x0.x) + (y.y - x0.y) * (y.y - x0.y);
    return std::log(lambda) - std::log1p(lambda * lambda * d2);
}

inline DiskFunction bubble(double lambda, Point2 x0) {
    if (!(lambda > 0)) throw config_error("lambda must be positive");
    DiskFunction f;
    f.value = [=](Point2 y) { return bubble_value(lambda, x0, y); };
    f.grad = [=](Point2 y) {
        double dx = y.x - x0.x, dy = y.y - x0.y;
        double q = -2 * lambda * lambda / (1 + lambda * lambda * (dx * dx + dy * dy));
        return Point2{q * dx, q * dy};
    };
    f.peaks = {{x0, 1 / lambda}};
    return f;
}

inline DiskField bubble_field(const PolarGrid& g, double lambda, Point2 x0) {
    return DiskField::sample(g, [&](Point2 y) { return bubble_value(lambda, x0, y); });
}

namespace detail {

// C-infinity step: 1 on [0,a], 0 on [b, inf)
inline double smooth_step_inf(double s, double a, double b) {
    if (s <= a) return 1;
    if (s >= b) return 0;
    double x = (s - a) / (b - a);
    double p = std::exp(-1 / (1 - x)), q = std::exp(-1 / x);
    return p / (p + q);
}

inline const std::array<double, 10>& gl_nodes() {
    static const auto n = [] {
        std::array<double, 10> a{};
        const auto& ab = boost::math::quadrature::gauss<double, 10>::abscissa();
        for (size_t i = 0; i < 5; ++i) {
            a[i] = -ab[4 - i];
            a[9 - i] = ab[4 - i];
        }
        return a;
    }();
    return n;
}

inline const std::array<double, 10>& gl_weights() {
    static const auto w = [] {
        std::array<double, 10> a{};
        const auto& wt = boost::math::quadrature::gauss<double, 10>::weights();
        for (size_t i = 0; i < 5; ++i) a[i] = a[9 - i] = wt[4 - i];
        return a;
    }();
    return w;
}

// 10-point Gauss-Legendre nodes on a list of panels
inline void panel_rule(const std::vector<double>& br, std::vector<double>& x, std::vector<double>& w) {
    const auto& n = gl_nodes();
    const auto& q = gl_weights();
    for (size_t p = 0; p + 1 < br.size(); ++p) {
        double a = br[p], b = br[p + 1], h = 0.5 * (b - a);
        if (!(h > 0)) continue;
        for (size_t k = 0; k < 10; ++k) {
            x.push_back(0.5 * (a + b) + h * n[k]);
            w.push_back(h * q[k]);
        }
    }
}

}  // namespace detail

struct QuadOptions {
    int global_panels = 32;
    int global_angles = 384;
    int patch_angles = 96;
    double patch_max = 0.2;
    double patch_ratio = 2;  // geometric grading of the patch panels
};

// Nodes and weights for int_B f dx, resolving peaks with graded polar patches joined by a
// smooth partition of unity; the global polar rule has a panel break at r = 3/4.
struct DiskQuadrature {
    std::vector<Point2> x;
    std::vector<double> w;
    std::vector<int> peak;     // -1 for nodes of the global rule
    std::vector<Point2> off;   // offset from the peak centre

    static DiskQuadrature build(const std::vector<Peak>& peaks, const QuadOptions& o = {}) {
        DiskQuadrature Q;
        std::vector<double> radius(peaks.size());
        for (size_t i = 0; i < peaks.size(); ++i) {
            double r = std::min(o.patch_max, 0.9 * (1 - norm(peaks[i].c)));
            for (size_t j = 0; j < peaks.size(); ++j)
                if (j != i) r = std::min(r, 0.45 * dist(peaks[i].c, peaks[j].c));
            radius[i] = r > 1e-6 ? r : 0;
        }
        auto cover = [&](Point2 y) {
            double s = 0;
            for (size_t i = 0; i < peaks.size(); ++i)
                if (radius[i] > 0) s += detail::smooth_step_inf(dist(y, peaks[i].c), 0.5 * radius[i], radius[i]);
            return s;
        };
        // global polar rule
        std::vector<double> br;
        for (int p = 0; p <= o.global_panels; ++p) br.push_back(double(p) / o.global_panels);
        br.push_back(0.75);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        std::vector<double> rr, rw;
        detail::panel_rule(br, rr, rw);
        const double dth = two_pi / o.global_angles;
        for (size_t a = 0; a < rr.size(); ++a)
            for (int j = 0; j < o.global_angles; ++j) {
                double th = (j + 0.5) * dth;
                Point2 y{rr[a] * std::cos(th), rr[a] * std::sin(th)};
                double wt = rw[a] * rr[a] * dth * (1 - cover(y));
                if (wt > 0) {
                    Q.x.push_back(y);
                    Q.w.push_back(wt);
                    Q.peak.push_back(-1);
                    Q.off.push_back({0, 0});
                }
            }
        // graded patches
        for (size_t i = 0; i < peaks.size(); ++i) {
            if (radius[i] == 0) continue;
            const double R = radius[i];
            double a0 = std::min(peaks[i].scale / 4, R / 4);
            std::vector<double> pb{0};
            for (double s = a0; s < R; s *= o.patch_ratio) pb.push_back(s);
            pb.push_back(0.5 * R);
            pb.push_back(R);
            std::sort(pb.begin(), pb.end());
            pb.erase(std::unique(pb.begin(), pb.end()), pb.end());
            std::vector<double> sr, sw;
            detail::panel_rule(pb, sr, sw);
            const double dp = two_pi / o.patch_angles;
            for (size_t a = 0; a < sr.size(); ++a) {
                double psi = detail::smooth_step_inf(sr[a], 0.5 * R, R);
                if (psi == 0) continue;
                for (int j = 0; j < o.patch_angles; ++j) {
                    double th = (j + 0.5) * dp;
                    Point2 o{sr[a] * std::cos(th), sr[a] * std::sin(th)};
                    Q.x.push_back({peaks[i].c.x + o.x, peaks[i].c.y + o.y});
                    Q.w.push_back(sw[a] * sr[a] * dp * psi);
                    Q.peak.push_back(int(i));
                    Q.off.push_back(o);
                }
            }
        }
        return Q;
    }

    double value(const DiskFunction& u, size_t k) const {
        return peak[k] >= 0 && u.value_near ? u.value_near(size_t(peak[k]), off[k]) : u.value(x[k]);
    }
    Point2 grad(const DiskFunction& u, size_t k) const {
        return peak[k] >= 0 && u.grad_near ? u.grad_near(size_t(peak[k]), off[k]) : u.grad(x[k]);
    }
};

struct AnalyticEval {
    double energy = 0;    // int |grad u|^2
    double log_mass = 0;  // log int h~ e^{2u}
    double I = 0;
    std::vector<Atom2> atoms;  // normalized f~_u on the quadrature nodes
};

inline bool vanishes_on_boundary(const DiskFunction& u) {
    for (int j = 0; j < 16; ++j) {
        double th = two_pi * j / 16;
        if (std::abs(u.value({std::cos(th), std::sin(th)})) > 1e-12) return false;
    }
    return true;
}

inline double dirichlet_energy(const DiskFunction& u, const QuadOptions& o = {}) {
    auto Q = DiskQuadrature::build(u.peaks, o);
    double e = 0;
    for (size_t k = 0; k < Q.x.size(); ++k) {
        Point2 g = Q.grad(u, k);
        e += Q.w[k] * (g.x * g.x + g.y * g.y);
    }
    return e;
}

inline AnalyticEval evaluate(const DiskFunction& u, const SingularConfig& cfg, const QuadOptions& o = {},
                             bool keep_atoms = false) {
    if (cfg.domain != Domain::disk) throw config_error("disk function with a sphere configuration");
    auto Q = DiskQuadrature::build(u.peaks, o);
    AnalyticEval e;
    LogSum ls;
    std::vector<double> lm(Q.x.size());
    for (size_t k = 0; k < Q.x.size(); ++k) {
        Point2 g = Q.grad(u, k);
        e.energy += Q.w[k] * (g.x * g.x + g.y * g.y);
        lm[k] = std::log(Q.w[k]) + log_singular_weight(cfg, Q.x[k]) + 2 * Q.value(u, k);
        ls.add(lm[k]);
    }
    e.log_mass = ls.value();
    e.I = e.energy - cfg.rho * e.log_mass;
    if (!std::isfinite(e.I)) throw compute_error("functional is not finite");
    if (keep_atoms) {
        e.atoms.resize(Q.x.size());
        for (size_t k = 0; k < Q.x.size(); ++k) e.atoms[k] = {Q.x[k], std::exp(lm[k] - e.log_mass)};
    }
    return e;
}

inline double functional_I(const DiskFunction& u, const SingularConfig& cfg, const QuadOptions& o = {}) {
    if (!vanishes_on_boundary(u)) throw config_error("disk fields must vanish on the boundary");
    return evaluate(u, cfg, o).I;
}

// ---- test functions ----

enum class TestVariant { normalized, printed };

struct MixtureAtom {
    Point2 c;
    double lambda = 1;
    double logt = 0;
};

// c chi(|x|) log sum t_i (lambda_i^p / (1 + lambda_i^2 |x - c_i|^2))^2, chi = 1 on |x| <= 3/4
inline DiskFunction bubble_mixture(std::vector<MixtureAtom> at, double c, double p) {
    if (at.empty()) throw config_error("empty mixture");
    DiskFunction f;
    for (auto& a : at) {
        if (!(a.lambda > 0) || !(norm(a.c) < 1)) throw config_error("mixture atoms need lambda > 0 inside the disk");
        f.peaks.push_back({a.c, 1 / a.lambda});
    }
    // squared distances to every atom from y = at[near].c + o (near < 0: o is the point itself)
    auto d2s = [at](long near, Point2 o, Point2& y) {
        y = near < 0 ? o : Point2{at[size_t(near)].c.x + o.x, at[size_t(near)].c.y + o.y};
        std::vector<Point2> d(at.size());
        for (size_t i = 0; i < at.size(); ++i)
            d[i] = long(i) == near ? o : Point2{y.x - at[i].c.x, y.y - at[i].c.y};
        return d;
    };
    auto logS = [at, p](const std::vector<Point2>& d) {
        LogSum ls;
        for (size_t i = 0; i < at.size(); ++i) {
            const auto& a = at[i];
            double q = d[i].x * d[i].x + d[i].y * d[i].y;
            ls.add(a.logt + 2 * (p * std::log(a.lambda) - std::log1p(a.lambda * a.lambda * q)));
        }
        return ls.value();
    };
    auto value = [=](long near, Point2 o) {
        Point2 y;
        auto d = d2s(near, o, y);
        double chi = smooth_cut(norm(y), 0.75, 1.0);
        return chi == 0 ? 0.0 : c * chi * logS(d);
    };
    auto grad = [=](long near, Point2 o) {
        Point2 y;
        auto d = d2s(near, o, y);
        double r = norm(y);
        double chi = smooth_cut(r, 0.75, 1.0), dchi = smooth_cut_d(r, 0.75, 1.0);
        if (chi == 0) return Point2{0, 0};
        double L = logS(d);
        double gx = 0, gy = 0;
        for (size_t i = 0; i < at.size(); ++i) {
            const auto& a = at[i];
            double l2 = a.lambda * a.lambda, q = 1 + l2 * (d[i].x * d[i].x + d[i].y * d[i].y);
            double wi = std::exp(a.logt + 2 * (p * std::log(a.lambda) - std::log(q)) - L);
            gx += wi * (-4 * l2 * d[i].x / q);
            gy += wi * (-4 * l2 * d[i].y / q);
        }
        Point2 g{c * chi * gx, c * chi * gy};
        if (dchi != 0 && r > 0) {
            g.x += c * dchi * L * y.x / r;
            g.y += c * dchi * L * y.y / r;
        }
        return g;
    };
    f.value = [=](Point2 y) { return value(-1, y); };
    f.grad = [=](Point2 y) { return grad(-1, y); };
    f.value_near = [=](size_t i, Point2 o) { return value(long(i), o); };
    f.grad_near = [=](size_t i, Point2 o) { return grad(long(i), o); };
    return f;
}

// phi = c chi(|x|) log sum t_i (lambda^p / (1 + lambda^2 |x - xi_i|^2))^2 with xi_i = e^{i theta_i}/2;
// normalized: c = 1/2, p = 2; printed: c = 1, p = 1.
inline DiskFunction test_function_disk(double lambda, const Barycenter& sigma,
                                       TestVariant v = TestVariant::normalized) {
    if (!(lambda > 0)) throw config_error("lambda must be positive");
    if (sigma.atoms.empty()) throw config_error("empty barycenter");
    std::vector<MixtureAtom> at;
    for (auto& a : sigma.atoms) at.push_back({{0.5 * std::cos(a.theta), 0.5 * std::sin(a.theta)}, lambda, std::log(a.w)});
    return v == TestVariant::normalized ? bubble_mixture(at, 0.5, 2.0) : bubble_mixture(at, 1.0, 1.0);
}

// sigma~ = sum t_i delta_{xi_i}
inline std::vector<Atom2> disk_targets(const Barycenter& sigma) {
    std::vector<Atom2> out;
    for (auto& a : sigma.atoms) out.push_back({{0.5 * std::cos(a.theta), 0.5 * std::sin(a.theta)}, a.w});
    return out;
}

struct TestFunctionReport {
    double lambda = 0, I = 0, energy = 0, log_mass = 0, kr = 0;
};

inline TestFunctionReport test_function_report(double lambda, const Barycenter& sigma, const SingularConfig& cfg,
                                               TestVariant v = TestVariant::normalized, const QuadOptions& o = {}) {
    auto f = test_function_disk(lambda, sigma, v);
    auto e = evaluate(f, cfg, o, true);
    TestFunctionReport r;
    r.lambda = lambda;
    r.I = e.I;
    r.energy = e.energy;
    r.log_mass = e.log_mass;
    r.kr = kr_distance(e.atoms, disk_targets(sigma));
    return r;
}

// fraction of f~_u inside B_r(c), from the adaptive quadrature
inline double mass_in_ball(const DiskFunction& u, const SingularConfig& cfg, Point2 c, double r,
                           const QuadOptions& o = {}) {
    auto e = evaluate(u, cfg, o, true);
    double m = 0;
    for (auto& a : e.atoms)
        if (dist(a.p, c) < r) m += a.w;
    return m;
}

// ---- sphere test function ----

struct SphereAtom {
    Point3 p;
    double w = 0;
};

// equatorial atoms at longitudes theta_i
inline std::vector<SphereAtom> sphere_targets(const Barycenter& sigma) {
    std::vector<SphereAtom> out;
    for (auto& a : sigma.atoms) out.push_back({sphere_point(pi / 2, a.theta), a.w});
    return out;
}

inline double sphere_test_value(double lambda, const std::vector<SphereAtom>& at, Point3 x, TestVariant v) {
    const double c = v == TestVariant::normalized ? 0.5 : 1.0;
    const double p = v == TestVariant::normalized ? 2.0 : 1.0;
    LogSum ls;
    for (auto& a : at) {
        double d = geodesic_sphere(a.p, x);
        ls.add(std::log(a.w) + 2 * (p * std::log(lambda) - std::log1p(lambda * lambda * d * d)));
    }
    return c * ls.value();
}

inline SphereField test_function_sphere(const SphereGrid& g, double lambda, const Barycenter& sigma,
                                        TestVariant v = TestVariant::normalized) {
    if (!(lambda > 0)) throw config_error("lambda must be positive");
    if (sigma.atoms.empty()) throw config_error("empty barycenter");
    auto at = sphere_targets(sigma);
    return SphereField::sample(g, [&](Point3 x) { return sphere_test_value(lambda, at, x, v); });
}

// W1 on S^2 with geodesic cost; the density is reduced to at most 512 atoms by lat-lon buckets
inline double kr_distance(const SphereDensity& f, const std::vector<SphereAtom>& b) {
    double mb = 0;
    for (auto& a : b) mb += a.w;
    detail::check_prob(f.mass(), mb);
    const auto& g = f.grid;
    const size_t nb_lat = 16, nb_lon = 32;
    std::vector<double> sw(nb_lat * nb_lon, 0), sx(sw.size(), 0), sy(sw.size(), 0), sz(sw.size(), 0);
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) {
            double m = f.cell_mass(g.idx(i, j));
            if (m <= 0) continue;
            size_t bi = std::min(nb_lat - 1, i * nb_lat / g.n_lat), bj = std::min(nb_lon - 1, j * nb_lon / g.n_lon);
            size_t c = bi * nb_lon + bj;
            Point3 p = g.node(i, j);
            sw[c] += m;
            sx[c] += m * p.x;
            sy[c] += m * p.y;
            sz[c] += m * p.z;
        }
    std::vector<SphereAtom> a;
    for (size_t c = 0; c < sw.size(); ++c)
        if (sw[c] > 0) {
            double n = std::sqrt(sx[c] * sx[c] + sy[c] * sy[c] + sz[c] * sz[c]);
            Point3 p = n > 0 ? Point3{sx[c] / n, sy[c] / n, sz[c] / n} : g.node(c / nb_lon * g.n_lat / nb_lat, 0);
            a.push_back({p, sw[c]});
        }
    return transport_cost(a, b, [](const SphereAtom& x, const SphereAtom& y) { return geodesic_sphere(x.p, y.p); });
}

// ---- concentration functional ----

struct JResult {
    double value = 0;
    std::vector<size_t> centers;  // cell indices of the ball centres
};

namespace detail {

inline std::vector<std::vector<size_t>> disk_balls(const PolarGrid& g, const std::vector<size_t>& cand, double delta,
                                                   const std::vector<double>& mass) {
    std::vector<std::vector<size_t>> out(cand.size());
    const size_t n = g.n_r(), nt = g.n_theta;
    std::vector<double> rr(n);
    for (size_t i = 0; i < n; ++i) rr[i] = g.r(i);
    for (size_t k = 0; k < cand.size(); ++k) {
        size_t ci = cand[k] / nt, cj = cand[k] % nt;
        Point2 c = g.node(ci, cj);
        double rc = g.r(ci), rad = delta * rc;
        size_t lo = size_t(std::lower_bound(rr.begin(), rr.end(), rc - rad) - rr.begin());
        size_t hi = size_t(std::upper_bound(rr.begin(), rr.end(), rc + rad) - rr.begin());
        double half = std::asin(std::min(1.0, delta)) + g.dtheta();
        long span = long(std::ceil(half / g.dtheta()));
        if (2 * span + 1 >= long(nt)) span = long(nt) / 2;
        for (size_t i = lo; i < hi; ++i)
            for (long dj = -span; dj <= span; ++dj) {
                size_t j = size_t((long(cj) + dj) % long(nt) + long(nt)) % nt;
                size_t id = g.idx(i, j);
                if (mass[id] > 0 && dist(g.node(i, j), c) <= rad) out[k].push_back(id);
            }
        std::sort(out[k].begin(), out[k].end());
        out[k].erase(std::unique(out[k].begin(), out[k].end()), out[k].end());
    }
    return out;
}

// greedy union-of-balls maximization followed by single-ball exchange sweeps
inline JResult greedy_cover(const std::vector<std::vector<size_t>>& balls, const std::vector<double>& mass,
                            const std::vector<size_t>& cand, int k) {
    std::vector<int> cov(mass.size(), 0);
    std::vector<size_t> chosen;
    auto gain = [&](size_t b) {
        double s = 0;
        for (size_t id : balls[b])
            if (cov[id] == 0) s += mass[id];
        return s;
    };
    for (int step = 0; step < k; ++step) {
        double best = -1;
        size_t arg = 0;
        for (size_t b = 0; b < balls.size(); ++b) {
            double gb = gain(b);
            if (gb > best) {
                best = gb;
                arg = b;
            }
        }
        if (best <= 0) break;
        chosen.push_back(arg);
        for (size_t id : balls[arg]) ++cov[id];
    }
    for (int sweep = 0; sweep < 3; ++sweep) {
        bool improved = false;
        for (auto& cb : chosen) {
            for (size_t id : balls[cb]) --cov[id];
            double cur = gain(cb), best = cur;
            size_t arg = cb;
            for (size_t b = 0; b < balls.size(); ++b) {
                double gb = gain(b);
                if (gb > best + 1e-15) {
                    best = gb;
                    arg = b;
                }
            }
            if (arg != cb) improved = true;
            cb = arg;
            for (size_t id : balls[cb]) ++cov[id];
        }
        if (!improved) break;
    }
    JResult r;
    for (size_t id = 0; id < mass.size(); ++id)
        if (cov[id] > 0) r.value += mass[id];
    for (size_t b : chosen) r.centers.push_back(cand[b]);
    std::sort(r.centers.begin(), r.centers.end());
    return r;
}

}  // namespace detail

// sup over k balls B_{delta |x_i|}(x_i) of the mass of their union; node-lumped lower bound
inline JResult concentration_J_detail(const DiskDensity& f, int k, double delta) {
    if (k <= 0) throw config_error("k must be positive");
    if (!(delta > 0 && delta < 1)) throw config_error("delta must lie in (0,1)");
    const auto& g = f.grid;
    std::vector<double> mass(g.size());
    for (size_t c = 0; c < mass.size(); ++c) mass[c] = std::max(0.0, f.cell_mass(c));
    std::vector<size_t> cand(g.size());
    std::iota(cand.begin(), cand.end(), size_t(0));
    auto balls = detail::disk_balls(g, cand, delta, mass);
    return detail::greedy_cover(balls, mass, cand, k);
}

inline double concentration_J(const DiskDensity& f, int k, double delta) {
    return concentration_J_detail(f, k, delta).value;
}

// sphere variant: radius delta * min distance to the two singular points (default the poles)
inline JResult concentration_J_detail(const SphereDensity& f, int k, double delta, Point3 p1 = south_pole,
                                      Point3 p2 = north_pole) {
    if (k <= 0) throw config_error("k must be positive");
    if (!(delta > 0 && delta < 1)) throw config_error("delta must lie in (0,1)");
    const auto& g = f.grid;
    std::vector<double> mass(g.size());
    for (size_t c = 0; c < mass.size(); ++c) mass[c] = std::max(0.0, f.cell_mass(c));
    std::vector<size_t> cand(g.size());
    std::iota(cand.begin(), cand.end(), size_t(0));
    std::vector<std::vector<size_t>> balls(cand.size());
    for (size_t b = 0; b < cand.size(); ++b) {
        size_t ci = cand[b] / g.n_lon, cj = cand[b] % g.n_lon;
        Point3 c = g.node(ci, cj);
        double rad = delta * std::min(geodesic_sphere(c, p1), geodesic_sphere(c, p2));
        double th = g.colat(ci);
        size_t lo = size_t(std::max(0.0, std::floor((th - rad) / g.dcolat() - 0.5)));
        size_t hi = std::min(g.n_lat, size_t(std::max(0.0, std::ceil((th + rad) / g.dcolat() + 0.5))));
        for (size_t i = lo; i < hi; ++i) {
            double s = std::min(std::sin(g.colat(i)), std::sin(th));
            double half = s > 0 ? std::asin(std::min(1.0, std::sin(rad) / std::max(s, 1e-300))) + 2 * g.dlon() : pi;
            long span = long(std::ceil(half / g.dlon()));
            if (2 * span + 1 >= long(g.n_lon)) span = -1;
            if (span < 0) {
                for (size_t j = 0; j < g.n_lon; ++j)
                    if (mass[g.idx(i, j)] > 0 && geodesic_sphere(g.node(i, j), c) <= rad) balls[b].push_back(g.idx(i, j));
            } else {
                for (long dj = -span; dj <= span; ++dj) {
                    size_t j = size_t((long(cj) + dj) % long(g.n_lon) + long(g.n_lon)) % g.n_lon;
                    if (mass[g.idx(i, j)] > 0 && geodesic_sphere(g.node(i, j), c) <= rad) balls[b].push_back(g.idx(i, j));
                }
            }
        }
    }
    return detail::greedy_cover(balls, mass, cand, k);
}

inline double concentration_J(const SphereDensity& f, int k, double delta) {
    return concentration_J_detail(f, k, delta).value;
}

// atomic measures: centres range over the atoms themselves (exact for atoms off the origin)
inline double concentration_J(const std::vector<Atom2>& f, int k, double delta) {
    if (k <= 0) throw config_error("k must be positive");
    if (!(delta > 0 && delta < 1)) throw config_error("delta must lie in (0,1)");
    std::vector<double> mass;
    std::vector<size_t> cand;
    for (size_t i = 0; i < f.size(); ++i) {
        mass.push_back(std::max(0.0, f[i].w));
        if (norm(f[i].p) > 0) cand.push_back(i);
    }
    std::vector<std::vector<size_t>> balls(cand.size());
    for (size_t b = 0; b < cand.size(); ++b) {
        Point2 c = f[cand[b]].p;
        for (size_t i = 0; i < f.size(); ++i)
            if (mass[i] > 0 && dist(f[i].p, c) <= delta * norm(c)) balls[b].push_back(i);
    }
    return detail::greedy_cover(balls, mass, cand, k).value;
}

// ---- harmonic lifting ----

// bilinear interpolation in (r, theta) on the polar grid, using the boundary trace beyond the last node
inline double interpolate(const DiskField& u, Point2 x) {
    const auto& g = u.grid;
    const size_t n = g.n_r(), nt = g.n_theta;
    double r = norm(x);
    double th = canonical_angle(std::atan2(x.y, x.x));
    double fj = th / g.dtheta();
    size_t j0 = size_t(std::floor(fj)) % nt, j1 = (j0 + 1) % nt;
    double a = fj - std::floor(fj);
    auto row = [&](size_t i) { return (1 - a) * u.at(i, j0) + a * u.at(i, j1); };
    if (r <= g.r(0)) {
        double c = 0;
        for (size_t j = 0; j < nt; ++j) c += u.at(0, j);
        c /= double(nt);
        double b = r / g.r(0);
        return (1 - b) * c + b * row(0);
    }
    if (r >= g.r(n - 1)) {
        double bnd = (1 - a) * u.boundary[j0] + a * u.boundary[j1];
        double b = (r - g.r(n - 1)) / (g.outer() - g.r(n - 1));
        return (1 - b) * row(n - 1) + b * bnd;
    }
    size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        (g.r(mid) <= r ? lo : hi) = mid;
    }
    double b = (r - g.r(lo)) / (g.r(hi) - g.r(lo));
    return (1 - b) * row(lo) + b * row(hi);
}

struct LiftResult {
    DiskField field;
    double inner_energy = 0;  // int_{B_s(p)} |grad H u|^2 from the trace coefficients
    double trace_mean = 0;
};

inline LiftResult harmonic_lift(const DiskField& u, Point2 p, double s, int n_modes = 64) {
    if (!(s > 0) || !(norm(p) + s < u.grid.outer())) throw config_error("ball not contained in the domain");
    if (n_modes < 1) throw config_error("need at least one Fourier mode");
    const int nf = 4 * n_modes;
    std::vector<double> tr(nf);
    for (int k = 0; k < nf; ++k) {
        double ph = two_pi * k / nf;
        tr[k] = interpolate(u, {p.x + s * std::cos(ph), p.y + s * std::sin(ph)});
    }
    std::vector<double> a(n_modes + 1, 0), b(n_modes + 1, 0);
    for (int m = 0; m <= n_modes; ++m) {
        for (int k = 0; k < nf; ++k) {
            double ph = two_pi * k / nf;
            a[m] += tr[k] * std::cos(m * ph);
            b[m] += tr[k] * std::sin(m * ph);
        }
        a[m] *= (m == 0 ? 1.0 : 2.0) / nf;
        b[m] *= 2.0 / nf;
    }
    LiftResult res;
    res.field = u;
    res.trace_mean = a[0];
    for (int m = 1; m <= n_modes; ++m) res.inner_energy += pi * m * (a[m] * a[m] + b[m] * b[m]);
    const auto& g = u.grid;
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) {
            Point2 x = g.node(i, j);
            double d = dist(x, p);
            if (d >= s) continue;
            double rho = d / s, ph = std::atan2(x.y - p.y, x.x - p.x);
            double v = a[0], rp = 1;
            for (int m = 1; m <= n_modes; ++m) {
                rp *= rho;
                v += rp * (a[m] * std::cos(m * ph) + b[m] * std::sin(m * ph));
            }
            res.field.values[g.idx(i, j)] = v;
        }
    return res;
}

// sup of int_{B_s}|grad H u|^2 / int_{B_2s \ B_s}|grad u|^2: mode m gives (4^m+1)/(4^m-1), maximal at m = 1
inline double harmonic_lift_sharp_constant() { return 5.0 / 3.0; }

struct C0Calibration {
    double max_ratio = 0;
    int samples = 0;
};

// random fields u = sum_m f_m(rho) (cos, sin)(m phi) on the annulus 1 < rho < 2, with
// f = a (rho^m + b 4^m rho^-m) + sum_l c_l rho^{m+l}; b = 1 is the extremal profile with f'(2) = 0.
// inner energy from the trace, annulus energy by Gauss-Legendre quadrature (both scale free)
inline C0Calibration calibrate_C0(int n_samples, std::uint64_t seed, int max_mode = 4, int max_pow = 3) {
    if (n_samples < 1) throw config_error("need at least one sample");
    Rng rng(seed);
    C0Calibration c;
    c.samples = n_samples;
    std::vector<double> rr, rw;
    std::vector<double> br;
    for (int p = 0; p <= 8; ++p) br.push_back(1 + p / 8.0);
    detail::panel_rule(br, rr, rw);
    for (int s = 0; s < n_samples; ++s) {
        double inner = 0, outer = 0;
        double poly_scale = std::pow(10.0, rng.uniform(-4, 0));
        for (int m = 0; m <= max_mode; ++m) {
            for (int part = 0; part < (m == 0 ? 1 : 2); ++part) {
                double a = rng.uniform(-1, 1);
                std::vector<std::pair<int, double>> terms{{m, a}};
                if (m > 0) terms.push_back({-m, a * std::pow(4.0, m) * rng.uniform(0.5, 1.5)});
                for (int l = 1; l <= max_pow; ++l) terms.push_back({m + l, poly_scale * rng.uniform(-1, 1)});
                double f1 = 0;
                for (auto& [e, x] : terms) f1 += x;
                inner += pi * m * f1 * f1;
                double mf = m == 0 ? two_pi : pi;
                for (size_t q = 0; q < rr.size(); ++q) {
                    double r = rr[q], f = 0, df = 0;
                    for (auto& [e, x] : terms) {
                        f += x * std::pow(r, e);
                        df += x * e * std::pow(r, e - 1);
                    }
                    outer += mf * rw[q] * (df * df + double(m * m) * f * f / (r * r)) * r;
                }
            }
        }
        if (outer > 0) c.max_ratio = std::max(c.max_ratio, inner / outer);
    }
    return c;
}

// ---- critical set ----

struct CriticalValue {
    double value = 0;
    std::vector<std::pair<int, std::vector<int>>> generators;  // (k, J)
};

inline std::vector<CriticalValue> critical_set(const std::vector<double>& alphas, double rho_max) {
    if (!(rho_max > 0)) throw config_error("rho_max must be positive");
    for (double a : alphas)
        if (!(a > 0)) throw config_error("singular weights must be positive");
    const size_t m = alphas.size();
    if (m > 20) throw config_error("too many singular points");
    std::vector<std::pair<double, std::pair<int, std::vector<int>>>> all;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << m); ++mask) {
        double base = 0;
        std::vector<int> J;
        for (size_t j = 0; j < m; ++j)
            if (mask >> j & 1) {
                base += 4 * pi * (1 + alphas[j]);
                J.push_back(int(j));
            }
        for (int k = 0;; ++k) {
            if (k == 0 && J.empty()) continue;
            double v = 4 * pi * k + base;
            if (v > rho_max * (1 + 1e-14)) break;
            all.push_back({v, {k, J}});
        }
    }
    std::sort(all.begin(), all.end(), [](auto& a, auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<CriticalValue> out;
    for (auto& [v, gen] : all) {
        if (!out.empty() && std::abs(out.back().value - v) <= 1e-12 * v)
            out.back().generators.push_back(gen);
        else
            out.push_back({v, {gen}});
    }
    return out;
}

inline int k_alpha(double alpha) {
    if (!(alpha > 0)) throw config_error("alpha must be positive");
    return std::max(1, int(std::ceil(alpha - 1e-12)));
}

}  // namespace liouville
