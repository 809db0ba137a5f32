#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "barycenters.hpp"
#include "fields.hpp"
#include "functionals.hpp"

namespace liouville {

// ---- constants ----

struct C1Constant {
    double log_value = 0;
    double value = 0;  // inf once exp overflows
    bool astronomical = false;
};

// 1/log C1 = eps / (32 (k+1)^2 (1 + C0^2))
inline C1Constant constant_C1(double eps, int k_alpha, double C0) {
    if (!(eps > 0)) throw config_error("eps must be positive");
    if (k_alpha < 1) throw config_error("k_alpha must be at least 1");
    if (!(C0 > 0)) throw config_error("C0 must be positive");
    C1Constant c;
    c.log_value = 32.0 * (k_alpha + 1) * (k_alpha + 1) * (1 + C0 * C0) / eps;
    c.value = std::exp(c.log_value);
    c.astronomical = c.log_value > std::log(1e6);
    return c;
}

inline double sigma0_default(double tau, int k, double eps, double C1) {
    if (!(tau > 0) || k < 1 || !(eps > 0) || !(C1 > 1)) throw config_error("bad parameters for sigma_0");
    return tau / (100.0 * k * k) * eps / (4.0 * (k + 1) * std::log(C1));
}

// ---- concentration / vanishing alternative ----

struct AlternativeParams {
    int k = 1;
    double delta = 0.05;
    double tau = 0.05;
    double eps = 1;
    double C1 = 10;
    double sigma0 = 0;  // 0: the default from tau, k, eps, C1
    int N = 0;          // 0: 4(k+1)

    AlternativeParams resolved() const {
        AlternativeParams p = *this;
        if (p.k < 1) throw config_error("k must be positive");
        if (!(p.delta > 0 && p.delta < 1)) throw config_error("delta must lie in (0,1)");
        if (!(p.tau > 0 && p.tau < 1)) throw config_error("tau must lie in (0,1)");
        if (!(p.C1 > 1)) throw config_error("C1 must exceed 1");
        if (p.sigma0 == 0) p.sigma0 = sigma0_default(p.tau, p.k, p.eps, p.C1);
        if (!(p.sigma0 > 0)) throw config_error("sigma_0 must be positive");
        if (p.N == 0) p.N = 4 * (p.k + 1);
        if (p.N < 4 * (p.k + 1)) throw config_error("N must be at least 4(k+1)");
        return p;
    }
    double inner_factor() const { return std::pow(10.0 * C1 * k, -8.0); }
    double outer_factor() const { return std::pow(10.0 * C1 * k, -4.0); }
};

enum class Verdict { concentrated, separated_points, vanishing, no_certificate };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::concentrated: return "Concentrated";
        case Verdict::separated_points: return "SeparatedPoints";
        case Verdict::vanishing: return "Vanishing";
        default: return "NoCertificate";
    }
}

struct SeparatedPoint {
    Point2 p;
    double mass = 0;
};

struct AlternativeReport {
    Verdict verdict = Verdict::no_certificate;
    AlternativeParams params;
    double J = 0;
    std::vector<SeparatedPoint> points;
    double r = 0, R = 0, annulus_mass = 0;
    std::vector<double> s;
    double jj3_max = 0;
    double slack = 0;  // smallest margin found by the re-verification
};

namespace detail {

// cumulative radial mass, linear in log r inside each ring (in r^2 for a ring touching the origin)
struct RadialMass {
    std::vector<double> edges, ring, cum;

    static RadialMass build(const DiskDensity& f) {
        RadialMass m;
        const auto& g = f.grid;
        m.edges = g.edges;
        m.ring.assign(g.n_r(), 0.0);
        for (size_t i = 0; i < g.n_r(); ++i)
            for (size_t j = 0; j < g.n_theta; ++j) m.ring[i] += std::max(0.0, f.cell_mass(g.idx(i, j)));
        m.cum.assign(g.n_r() + 1, 0.0);
        for (size_t i = 0; i < g.n_r(); ++i) m.cum[i + 1] = m.cum[i] + m.ring[i];
        return m;
    }

    static double frac(double lo, double hi, double x) {
        if (x <= lo) return 0;
        if (x >= hi) return 1;
        if (lo == 0) return x * x / (hi * hi);
        return std::log(x / lo) / std::log(hi / lo);
    }

    double M(double r) const {
        if (r <= edges.front()) return 0;
        if (r >= edges.back()) return cum.back();
        size_t i = size_t(std::upper_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
        return cum[i] + ring[i] * frac(edges[i], edges[i + 1], r);
    }

    // smallest r with M(r) >= m
    double inverse(double m) const {
        if (m <= 0) return edges.front();
        size_t idx = size_t(std::lower_bound(cum.begin(), cum.end(), m) - cum.begin());
        if (idx >= cum.size()) return edges.back();
        if (idx == 0) return edges.front();
        size_t i = idx - 1;
        double phi = std::clamp((m - cum[i]) / ring[i], 0.0, 1.0);
        double lo = edges[i], hi = edges[i + 1];
        if (lo == 0) return hi * std::sqrt(phi);
        return lo * std::pow(hi / lo, phi);
    }
};

// evaluation points for sup over s in [a, b] of a window mass: ends, ring-edge breakpoints, log scan
inline std::vector<double> window_points(const std::vector<double>& edges, double a, double b, double C1) {
    std::vector<double> s{a, b};
    for (double e : edges)
        for (double x : {e * C1, e / C1})
            if (x > a && x < b) s.push_back(x);
    const int n = 64;
    for (int i = 1; i < n; ++i) s.push_back(a * std::pow(b / a, double(i) / n));
    std::sort(s.begin(), s.end());
    return s;
}

// annulus mass by direct overlap with every ring, independent of the cumulative table
inline double annulus_mass_direct(const DiskDensity& f, double a, double b) {
    const auto& g = f.grid;
    double m = 0;
    for (size_t i = 0; i < g.n_r(); ++i) {
        double lo = g.edges[i], hi = g.edges[i + 1];
        double fr = RadialMass::frac(lo, hi, std::min(b, hi)) - RadialMass::frac(lo, hi, std::max(a, lo));
        if (fr <= 0) continue;
        double ring = 0;
        for (size_t j = 0; j < g.n_theta; ++j) ring += std::max(0.0, f.cell_mass(g.idx(i, j)));
        m += fr * ring;
    }
    return m;
}

inline double ball_mass_direct(const DiskDensity& f, Point2 p, double r) {
    const auto& g = f.grid;
    double m = 0;
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j)
            if (dist(g.node(i, j), p) <= r) m += std::max(0.0, f.cell_mass(g.idx(i, j)));
    return m;
}

inline bool separated_search(const DiskDensity& f, const AlternativeParams& p, AlternativeReport& rep) {
    const auto& g = f.grid;
    std::vector<double> mass(g.size());
    for (size_t c = 0; c < mass.size(); ++c) mass[c] = std::max(0.0, f.cell_mass(c));
    std::vector<size_t> all(g.size());
    std::iota(all.begin(), all.end(), size_t(0));
    auto balls = disk_balls(g, all, p.inner_factor(), mass);
    std::vector<double> bm(g.size(), 0.0);
    for (size_t c = 0; c < g.size(); ++c)
        for (size_t id : balls[c]) bm[c] += mass[id];
    // local maxima of the ball mass over the 8 neighbours, ties to the lower index
    const size_t n = g.n_r(), nt = g.n_theta;
    std::vector<size_t> cand;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < nt; ++j) {
            size_t c = g.idx(i, j);
            if (!(bm[c] >= p.sigma0)) continue;
            bool top = true;
            for (int di = -1; di <= 1 && top; ++di)
                for (int dj = -1; dj <= 1 && top; ++dj) {
                    if ((di == 0 && dj == 0) || (di < 0 && i == 0) || (di > 0 && i + 1 == n)) continue;
                    size_t o = g.idx(size_t(long(i) + di), size_t((long(j) + long(nt) + dj) % long(nt)));
                    if (bm[o] > bm[c] || (bm[o] == bm[c] && o < c)) top = false;
                }
            if (top) cand.push_back(c);
        }
    std::sort(cand.begin(), cand.end(), [&](size_t a, size_t b) { return bm[a] != bm[b] ? bm[a] > bm[b] : a < b; });
    std::vector<size_t> pick;
    for (size_t c : cand) {
        Point2 x = g.node(c / nt, c % nt);
        bool ok = true;
        for (size_t q : pick) {
            Point2 y = g.node(q / nt, q % nt);
            if (dist(x, y) < p.outer_factor() * (norm(x) + norm(y))) ok = false;
        }
        if (ok) pick.push_back(c);
        if (int(pick.size()) == p.k + 1) break;
    }
    if (int(pick.size()) < p.k + 1) return false;
    rep.verdict = Verdict::separated_points;
    for (size_t c : pick) rep.points.push_back({g.node(c / nt, c % nt), bm[c]});
    return true;
}

inline bool vanishing_search(const DiskDensity& f, const AlternativeParams& p, AlternativeReport& rep) {
    auto M = RadialMass::build(f);
    const auto& e = M.edges;
    double e_lo = e[0] > 0 ? e[0] : e[1];
    const double need = p.tau / (100.0 * p.k * p.k);
    struct Best {
        double mass = -1, ratio = 0, r = 0, R = 0, jj3 = 0;
    } best;
    for (int b = 0; std::exp2(-b) >= e_lo; ++b) {
        double R = std::exp2(-b);
        if (R > e.back()) continue;
        for (int a = b + 1; std::exp2(-a) >= e_lo; ++a) {
            double r = std::exp2(-a);
            if (!(R / r > p.C1 * p.C1)) continue;
            double m = M.M(R) - M.M(r);
            if (m < need) continue;
            double w = 0;
            for (double s : window_points(e, p.C1 * r, R / p.C1, p.C1)) w = std::max(w, M.M(p.C1 * s) - M.M(s / p.C1));
            if (!(w < p.sigma0)) continue;
            // largest mass, then the tightest annulus, then the outermost
            double tol = 1e-12 * std::max(m, best.mass);
            bool better = best.mass < 0 || m > best.mass + tol ||
                          (std::abs(m - best.mass) <= tol && (R / r < best.ratio || (R / r == best.ratio && R > best.R)));
            if (better) best = {m, R / r, r, R, w};
        }
    }
    if (best.mass < 0) return false;
    rep.verdict = Verdict::vanishing;
    rep.r = best.r;
    rep.R = best.R;
    rep.annulus_mass = best.mass;
    rep.jj3_max = best.jj3;
    double m0 = M.M(best.r);
    for (int i = 0; i <= p.N; ++i) rep.s.push_back(i == 0 ? best.r : M.inverse(m0 + best.mass * i / p.N));
    rep.s.back() = std::min(rep.s.back(), best.R);
    return true;
}

}  // namespace detail

// Checks the defining inequalities of a certificate by direct summation. Returns the smallest slack;
// throws verify_error when any inequality fails.
inline double reverify(const DiskDensity& f, const AlternativeReport& rep) {
    const auto& p = rep.params;
    double slack = INFINITY;
    auto need = [&](bool ok, double margin, const char* what) {
        if (!ok) throw verify_error(std::string("certificate re-verification failed: ") + what);
        slack = std::min(slack, margin);
    };
    if (rep.verdict == Verdict::separated_points) {
        need(int(rep.points.size()) == p.k + 1, INFINITY, "point count");
        for (size_t i = 0; i < rep.points.size(); ++i) {
            Point2 x = rep.points[i].p;
            need(norm(x) > 0 && norm(x) < 1, 1 - norm(x), "point outside B minus the origin");
            double m = detail::ball_mass_direct(f, x, p.inner_factor() * norm(x));
            need(m >= p.sigma0, m - p.sigma0, "ball mass below sigma");
            for (size_t j = 0; j < i; ++j) {
                Point2 y = rep.points[j].p;
                double gap = dist(x, y) - p.outer_factor() * (norm(x) + norm(y));
                need(gap >= 0, gap, "balls overlap");
            }
        }
    } else if (rep.verdict == Verdict::vanishing) {
        need(rep.r > 0 && rep.r < rep.R && rep.R <= 1, rep.R - rep.r, "annulus radii");
        double m = detail::annulus_mass_direct(f, rep.r, rep.R);
        double need1 = p.tau / (100.0 * p.k * p.k);
        need(m >= need1, m - need1, "annulus mass");
        need(int(rep.s.size()) == p.N + 1 && p.N >= 4 * (p.k + 1), INFINITY, "radius count");
        need(rep.s.front() >= rep.r && rep.s.back() <= rep.R, INFINITY, "radii outside the annulus");
        for (int i = 0; i < p.N; ++i) {
            need(rep.s[i] < rep.s[i + 1], rep.s[i + 1] - rep.s[i], "radii not increasing");
            double mi = detail::annulus_mass_direct(f, rep.s[i], rep.s[i + 1]);
            double err = std::abs(mi - m / p.N);
            need(err <= 1e-9 * m, 1e-9 * m - err, "unequal slices");
        }
        double a = p.C1 * rep.r, b = rep.R / p.C1;
        need(a < b, b - a, "empty window range");
        for (double s : detail::window_points(f.grid.edges, a, b, p.C1)) {
            double w = detail::annulus_mass_direct(f, s / p.C1, p.C1 * s);
            need(w < p.sigma0, p.sigma0 - w, "window mass");
        }
    }
    return slack;
}

inline AlternativeReport detect_alternative(const DiskDensity& f, const AlternativeParams& params) {
    AlternativeReport rep;
    rep.params = params.resolved();
    if (std::abs(f.mass() - 1) > 1e-9) throw config_error("density must be normalized");
    rep.J = concentration_J(f, rep.params.k, rep.params.delta);
    if (rep.J > 1 - rep.params.tau) {
        rep.verdict = Verdict::concentrated;
        return rep;
    }
    if (detail::separated_search(f, rep.params, rep) || detail::vanishing_search(f, rep.params, rep))
        rep.slack = reverify(f, rep);
    return rep;
}

// ---- hypothesis checks ----

struct MRCheck {
    double annulus_energy = 0, total_energy = 0, inner_mass = 0, outer_mass = 0;
    bool energy_ok = false, inner_ok = false, outer_ok = false;
    bool all() const { return energy_ok && inner_ok && outer_ok; }
};

// energy per radial row: angular faces of the row plus half of each adjacent radial face
inline std::vector<double> row_energy(const DiskField& u) {
    const auto& g = u.grid;
    const size_t n = g.n_r(), m = g.n_theta;
    const double dth = g.dtheta();
    std::vector<double> e(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double ri = g.r(i), w = g.edges[i + 1] - g.edges[i];
        for (size_t j = 0; j < m; ++j) {
            double d = u.at(i, (j + 1) % m) - u.at(i, j);
            e[i] += d * d * w / (ri * dth);
        }
        double rn = i + 1 < n ? g.r(i + 1) : g.outer(), face = 0;
        for (size_t j = 0; j < m; ++j) {
            double d = (i + 1 < n ? u.at(i + 1, j) : u.boundary[j]) - u.at(i, j);
            face += d * d * g.edges[i + 1] * dth / (rn - ri);
        }
        if (i + 1 < n) {
            e[i] += 0.5 * face;
            e[i + 1] += 0.5 * face;
        } else {
            e[i] += face;
        }
    }
    return e;
}

// annulus energy on rows with node in (s, 4s); masses of f~_u over nodes with |x| < s and |x| > 4s
inline MRCheck check_mr_hypotheses(const DiskField& u, double s, double eta, double tau, const SingularConfig& cfg) {
    if (!(s > 0 && s < 0.25)) throw config_error("s must lie in (0, 1/4)");
    if (!(eta > 0) || !(tau > 0)) throw config_error("eta and tau must be positive");
    if (cfg.domain != Domain::disk || !cfg.canonical()) throw config_error("needs one singularity at the origin");
    const auto& g = u.grid;
    MRCheck c;
    auto e = row_energy(u);
    for (size_t i = 0; i < g.n_r(); ++i) {
        c.total_energy += e[i];
        if (g.r(i) > s && g.r(i) < 4 * s) c.annulus_energy += e[i];
    }
    auto f = conformal_density(u, cfg).density;
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) {
            double m = f.cell_mass(g.idx(i, j));
            if (g.r(i) < s) c.inner_mass += m;
            if (g.r(i) > 4 * s) c.outer_mass += m;
        }
    c.energy_ok = c.annulus_energy <= eta * c.total_energy;
    c.inner_ok = c.inner_mass >= tau;
    c.outer_ok = c.outer_mass >= tau;
    return c;
}

struct SpreadCheck {
    std::vector<double> masses;
    double min_distance = INFINITY;
    bool ok = false;
};

namespace detail {

template <class Density, class Dist>
SpreadCheck check_spread_impl(const Density& f, const std::vector<std::vector<size_t>>& regions, double gamma0,
                              double delta0, Dist node_dist) {
    const size_t l1 = regions.size();
    if (l1 < 1) throw config_error("need at least one region");
    if (!(gamma0 > 0 && gamma0 <= 1.0 / double(l1))) throw config_error("gamma_0 must lie in (0, 1/(l+1)]");
    if (delta0 < 0) throw config_error("delta_0 must be nonnegative");
    std::vector<int> owner(f.values.size(), -1);
    for (size_t r = 0; r < l1; ++r)
        for (size_t c : regions[r]) {
            if (c >= owner.size()) throw config_error("region cell out of range");
            if (owner[c] >= 0 && owner[c] != int(r)) throw config_error("regions overlap");
            owner[c] = int(r);
        }
    SpreadCheck s;
    s.ok = true;
    for (size_t r = 0; r < l1; ++r) {
        double m = 0;
        for (size_t c : regions[r]) m += f.cell_mass(c);
        s.masses.push_back(m);
        if (!(m >= gamma0)) s.ok = false;
    }
    if (l1 > 1) {
        for (size_t a = 0; a < l1; ++a)
            for (size_t b = a + 1; b < l1; ++b)
                for (size_t x : regions[a])
                    for (size_t y : regions[b]) s.min_distance = std::min(s.min_distance, node_dist(x, y));
        if (s.min_distance < delta0) s.ok = false;
    }
    return s;
}

}  // namespace detail

// masses of l+1 disjoint cell regions against gamma_0 (inclusive) and pairwise node distance against delta_0
inline SpreadCheck check_spread(const DiskDensity& f, const std::vector<std::vector<size_t>>& regions, double gamma0,
                                double delta0 = 0) {
    const auto& g = f.grid;
    return detail::check_spread_impl(f, regions, gamma0, delta0, [&](size_t a, size_t b) {
        return dist(g.node(a / g.n_theta, a % g.n_theta), g.node(b / g.n_theta, b % g.n_theta));
    });
}

inline SpreadCheck check_spread(const SphereDensity& f, const std::vector<std::vector<size_t>>& regions, double gamma0,
                                double delta0 = 0) {
    const auto& g = f.grid;
    return detail::check_spread_impl(f, regions, gamma0, delta0, [&](size_t a, size_t b) {
        return geodesic_sphere(g.node(a / g.n_lon, a % g.n_lon), g.node(b / g.n_lon, b % g.n_lon));
    });
}

// ---- improved inequality ----

struct ImprovementReport {
    int k = 1;
    double eps = 0, alpha = 0;
    double lhs = 0;        // log int f_u
    double rhs_coeff = 0;  // (1 + eps) / (4 pi min(1 + k, 1 + alpha))
    double dirichlet = 0;
    double C_emp = 0;
};

namespace detail {

inline ImprovementReport improvement(double log_mass, double energy, int k, double eps, const SingularConfig& cfg) {
    if (k < 1) throw config_error("k must be positive");
    if (!(eps > 0)) throw config_error("eps must be positive");
    if (cfg.domain != Domain::disk || !cfg.canonical()) throw config_error("needs one singularity at the origin");
    ImprovementReport r;
    r.k = k;
    r.eps = eps;
    r.alpha = cfg.canonical_alpha();
    r.lhs = log_mass;
    r.dirichlet = energy;
    r.rhs_coeff = (1 + eps) / (4 * pi * std::min(1.0 + k, 1.0 + r.alpha));
    r.C_emp = r.lhs - r.rhs_coeff * r.dirichlet;
    if (!std::isfinite(r.C_emp)) throw compute_error("improvement report is not finite");
    return r;
}

}  // namespace detail

inline ImprovementReport improved_bound_report(const DiskField& u, int k, double eps, const SingularConfig& cfg) {
    if (!u.dirichlet()) throw config_error("disk fields must vanish on the boundary");
    return detail::improvement(conformal_density(u, cfg).log_mass, dirichlet_energy(u), k, eps, cfg);
}

inline ImprovementReport improved_bound_report(const DiskFunction& u, int k, double eps, const SingularConfig& cfg,
                                               const QuadOptions& o = {}) {
    if (!vanishes_on_boundary(u)) throw config_error("disk fields must vanish on the boundary");
    auto e = evaluate(u, cfg, o);
    return detail::improvement(e.log_mass, e.energy, k, eps, cfg);
}

// ---- penalized infimum over trial families ----

namespace detail {

struct NMResult {
    std::vector<double> x;
    double f = INFINITY;
    int evals = 0;
    bool converged = false;
};

// Nelder-Mead with dimension-adapted coefficients (Gao-Han); expansion is skipped when the expanded vertex
// would sit further than `cap` from the centroid
inline NMResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                            double step, int budget, double cap, double ftol = 1e-10) {
    const size_t n = x0.size();
    const double dn = double(n);
    const double ex = 1 + 2 / dn, ct = 0.75 - 0.5 / dn, sh = 1 - 1 / dn;
    NMResult res;
    std::vector<std::vector<double>> S(n + 1, x0);
    std::vector<double> F(n + 1);
    auto call = [&](const std::vector<double>& x) {
        ++res.evals;
        double v = fn(x);
        return std::isfinite(v) ? v : INFINITY;
    };
    for (size_t i = 0; i < n; ++i) S[i + 1][i] += step;
    for (size_t i = 0; i <= n && res.evals < budget; ++i) F[i] = call(S[i]);
    std::vector<size_t> ord(n + 1);
    auto sort_simplex = [&] {
        std::iota(ord.begin(), ord.end(), size_t(0));
        std::stable_sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return F[a] < F[b]; });
    };
    auto lerp = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
        std::vector<double> y(n);
        for (size_t d = 0; d < n; ++d) y[d] = c[d] + t * (x[d] - c[d]);
        return y;
    };
    while (res.evals + 2 <= budget) {
        sort_simplex();
        size_t lo = ord[0], hi = ord[n], nh = ord[n - 1];
        if (std::abs(F[hi] - F[lo]) <= ftol * (1 + std::abs(F[lo]))) {
            res.converged = true;
            break;
        }
        std::vector<double> c(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t d = 0; d < n; ++d) c[d] += S[ord[i]][d] / double(n);
        auto xr = lerp(c, S[hi], -1.0);
        double fr = call(xr);
        if (fr < F[lo]) {
            auto xe = lerp(c, S[hi], -ex);
            double de = 0;
            for (size_t d = 0; d < n; ++d) de += (xe[d] - c[d]) * (xe[d] - c[d]);
            double fe = std::sqrt(de) <= cap ? call(xe) : INFINITY;
            if (fe < fr) {
                S[hi] = xe;
                F[hi] = fe;
            } else {
                S[hi] = xr;
                F[hi] = fr;
            }
        } else if (fr < F[nh]) {
            S[hi] = xr;
            F[hi] = fr;
        } else {
            bool outside = fr < F[hi];
            auto xc = lerp(c, outside ? xr : S[hi], ct);
            double fc = call(xc);
            if (fc < (outside ? fr : F[hi])) {
                S[hi] = xc;
                F[hi] = fc;
            } else {
                for (size_t i = 1; i <= n && res.evals < budget; ++i) {
                    size_t v = ord[i];
                    S[v] = lerp(S[lo], S[v], sh);
                    F[v] = call(S[v]);
                }
            }
        }
    }
    sort_simplex();
    res.x = S[ord[0]];
    res.f = F[ord[0]];
    return res;
}

}  // namespace detail

struct FamilySpec {
    bool constrained = true;  // two bubbles plus Fourier terms, penalty on the moments
    int n_bubbles = 2;
    int n_modes = 2;
    std::vector<double> mu_schedule{1e2, 1e3, 1e4, 1e5, 1e6};
    double edge_cap = 0.1;
    double step = 0.25;
    double step_decay = 0.2;  // initial simplex size shrinks by this factor at each warm-started stage
    double first_share = 0.5;  // budget fraction of the first stage; the rest is split evenly
    QuadOptions quad{16, 128, 48, 0.2, 4};
};

struct InfimumResult {
    double penalized = INFINITY, I = 0, residual = 0;
    std::vector<double> params;
    std::vector<double> stage_values;
    int evaluations = 0;
    bool inconclusive = false;
};

namespace detail {

// Family parameters: per bubble (q_x, q_y, log lambda) with centre 0.9 q / sqrt(1 + |q|^2), then log weights of
// bubbles 2.., then Fourier coefficients (a_m, b_m) of Re sum (a_m - i b_m) z^m (1 - |z|^2).
inline size_t family_dim(const FamilySpec& s) {
    int nb = s.constrained ? s.n_bubbles : 1, nm = s.constrained ? s.n_modes : 0;
    return size_t(3 * nb + (nb - 1) + 2 * nm);
}

inline std::vector<double> family_start(const FamilySpec& s) {
    std::vector<double> x(family_dim(s), 0.0);
    int nb = s.constrained ? s.n_bubbles : 1;
    const double q = 0.5 / std::sqrt(0.81 - 0.25);  // centre radius 1/2
    for (int i = 0; i < nb; ++i) {
        double th = two_pi * i / nb;
        x[3 * i] = q * std::cos(th);
        x[3 * i + 1] = q * std::sin(th);
        x[3 * i + 2] = std::log(5.0);
    }
    return x;
}

inline DiskFunction family_member(const FamilySpec& s, const std::vector<double>& x) {
    int nb = s.constrained ? s.n_bubbles : 1, nm = s.constrained ? s.n_modes : 0;
    std::vector<MixtureAtom> at;
    for (int i = 0; i < nb; ++i) {
        double qx = x[3 * i], qy = x[3 * i + 1], d = 0.9 / std::sqrt(1 + qx * qx + qy * qy);
        at.push_back({{d * qx, d * qy}, std::exp(x[3 * i + 2]), i == 0 ? 0.0 : x[3 * nb + i - 1]});
    }
    auto f = bubble_mixture(at, 0.5, 2.0);
    if (nm == 0) return f;
    std::vector<std::complex<double>> c(nm);
    for (int m = 0; m < nm; ++m) c[m] = {x[4 * nb - 1 + 2 * m], -x[4 * nb + 2 * m]};
    auto poly = [c](Point2 y, std::complex<double>& dp) {
        std::complex<double> z(y.x, y.y), zp(1, 0), p(0, 0);
        dp = 0;
        for (size_t m = 0; m < c.size(); ++m) {
            dp += double(m + 1) * c[m] * zp;
            zp *= z;
            p += c[m] * zp;
        }
        return p.real();
    };
    auto add_v = [poly](double v, Point2 y) {
        std::complex<double> dp;
        return v + poly(y, dp) * (1 - y.x * y.x - y.y * y.y);
    };
    auto add_g = [poly](Point2 g, Point2 y) {
        std::complex<double> dp;
        double h = poly(y, dp), w = 1 - y.x * y.x - y.y * y.y;
        return Point2{g.x + dp.real() * w - 2 * y.x * h, g.y - dp.imag() * w - 2 * y.y * h};
    };
    auto v0 = f.value;
    auto g0 = f.grad;
    auto vn = f.value_near;
    auto gn = f.grad_near;
    auto pk = f.peaks;
    auto at_peak = [pk](size_t i, Point2 o) { return Point2{pk[i].c.x + o.x, pk[i].c.y + o.y}; };
    f.value = [=](Point2 y) { return add_v(v0(y), y); };
    f.grad = [=](Point2 y) { return add_g(g0(y), y); };
    f.value_near = [=](size_t i, Point2 o) { return add_v(vn(i, o), at_peak(i, o)); };
    f.grad_near = [=](size_t i, Point2 o) { return add_g(gn(i, o), at_peak(i, o)); };
    return f;
}

}  // namespace detail

// lowest I + mu |F_k(f~_u)|^2 found by Nelder-Mead with mu continuation; budget counts evaluations
inline InfimumResult moment_vanishing_infimum(const SingularConfig& cfg, int k, const FamilySpec& spec, int budget) {
    if (cfg.domain != Domain::disk || !cfg.canonical()) throw config_error("needs one singularity at the origin");
    if (k < 1) throw config_error("k must be positive");
    double alpha = cfg.canonical_alpha();
    if (!(cfg.rho < 4 * pi * std::min(1.0 + k, 1.0 + alpha))) throw config_error("rho must be below 4 pi min(1+k, 1+alpha)");
    if (spec.constrained && (spec.n_bubbles < 1 || spec.n_modes < 0)) throw config_error("bad family");
    if (spec.mu_schedule.empty()) throw config_error("empty penalty schedule");
    const int stages = int(spec.mu_schedule.size());
    if (budget < 2 * stages * int(detail::family_dim(spec) + 1)) throw config_error("budget too small for the family");
    if (!(spec.first_share > 0 && spec.first_share < 1)) throw config_error("first_share must lie in (0,1)");
    InfimumResult res;
    std::vector<double> x = detail::family_start(spec);
    auto parts = [&](const std::vector<double>& p, double& I, double& resid) {
        for (size_t i = 0; i < p.size(); ++i)
            if (!std::isfinite(p[i])) return false;
        int nb = spec.constrained ? spec.n_bubbles : 1;
        for (int i = 0; i < nb; ++i)
            if (p[3 * i + 2] < std::log(1e-3) || p[3 * i + 2] > std::log(1e100)) return false;
        try {
            auto e = evaluate(detail::family_member(spec, p), cfg, spec.quad, true);
            std::vector<CircleAtom> ca(e.atoms.size());
            for (size_t q = 0; q < e.atoms.size(); ++q) ca[q] = {std::atan2(e.atoms[q].p.y, e.atoms[q].p.x), e.atoms[q].w};
            auto F = moment_map(ca, k);
            resid = 0;
            for (auto& v : F) resid += std::norm(v);
            resid = std::sqrt(resid);
            I = e.I;
            return true;
        } catch (const compute_error&) {
            return false;
        }
    };
    std::vector<int> stage_budget(size_t(stages), 0);
    stage_budget[0] = stages == 1 ? budget : int(spec.first_share * budget);
    for (int st = 1; st < stages; ++st) {
        int rest = budget - stage_budget[0];
        stage_budget[size_t(st)] = rest / (stages - 1) + (st - 1 < rest % (stages - 1) ? 1 : 0);
    }
    bool last_converged = false;
    for (int st = 0; st < stages; ++st) {
        double mu = spec.constrained ? spec.mu_schedule[st] : 0.0;
        int b = stage_budget[size_t(st)];
        auto obj = [&](const std::vector<double>& p) {
            double I, r;
            if (!parts(p, I, r)) return std::numeric_limits<double>::infinity();
            return I + mu * r * r;
        };
        auto nm = detail::nelder_mead(obj, x, spec.step * std::pow(spec.step_decay, st), b, spec.edge_cap);
        res.evaluations += nm.evals;
        if (std::isfinite(nm.f)) x = nm.x;
        res.stage_values.push_back(nm.f);
        last_converged = nm.converged;
    }
    double I = 0, r = 0;
    if (!parts(x, I, r)) throw compute_error("no finite family member found");
    res.params = x;
    res.I = I;
    res.residual = r;
    res.penalized = I + (spec.constrained ? spec.mu_schedule.back() : 0.0) * r * r;
    res.inconclusive = !last_converged;
    return res;
}

// ---- serialization ----

inline json to_json(const AlternativeParams& p) {
    return json{{"k", p.k},   {"delta", p.delta},   {"tau", p.tau}, {"eps", p.eps},
                {"C1", p.C1}, {"sigma0", p.sigma0}, {"N", p.N}};
}

inline json to_json(const AlternativeReport& r) {
    json j{{"verdict", verdict_name(r.verdict)}, {"params", to_json(r.params)}, {"J", r.J}};
    if (r.verdict == Verdict::separated_points) {
        json pts = json::array();
        for (auto& p : r.points) pts.push_back(json{{"x", p.p.x}, {"y", p.p.y}, {"mass", p.mass}});
        j["points"] = pts;
        j["ball_radius_factor"] = r.params.inner_factor();
        j["disjoint_radius_factor"] = r.params.outer_factor();
    }
    if (r.verdict == Verdict::vanishing) {
        j["r"] = r.r;
        j["R"] = r.R;
        j["annulus_mass"] = r.annulus_mass;
        j["s"] = r.s;
        j["window_mass_max"] = r.jj3_max;
    }
    if (r.verdict == Verdict::separated_points || r.verdict == Verdict::vanishing) j["verification_slack"] = r.slack;
    return j;
}

inline json to_json(const ImprovementReport& r) {
    return json{{"k", r.k},
                {"eps", r.eps},
                {"alpha", r.alpha},
                {"lhs", r.lhs},
                {"rhs_coeff", r.rhs_coeff},
                {"dirichlet", r.dirichlet},
                {"C_emp", r.C_emp}};
}

inline json to_json(const MRCheck& c) {
    return json{{"annulus_energy", c.annulus_energy}, {"total_energy", c.total_energy}, {"inner_mass", c.inner_mass},
                {"outer_mass", c.outer_mass},         {"energy_ok", c.energy_ok},       {"inner_ok", c.inner_ok},
                {"outer_ok", c.outer_ok}};
}

inline json to_json(const InfimumResult& r) {
    return json{{"penalized", r.penalized},       {"I", r.I},
                {"residual", r.residual},         {"params", r.params},
                {"stage_values", r.stage_values}, {"evaluations", r.evaluations},
                {"inconclusive", r.inconclusive}};
}

}  // namespace liouville
