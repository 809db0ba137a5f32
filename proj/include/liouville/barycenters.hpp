#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "measures.hpp"

namespace liouville {

using MomentVector = std::vector<cplx>;
using WPoint = std::vector<cplx>;

struct Barycenter {
    std::vector<CircleAtom> atoms;

    // merge atoms closer than merge_tol, drop zero weights, canonicalize and sort by angle
    static Barycenter make(std::vector<CircleAtom> a, double merge_tol = 1e-10) {
        for (auto& x : a) {
            if (!(x.w >= 0)) throw config_error("barycenter weights must be nonnegative");
            x.theta = canonical_angle(x.theta);
        }
        std::erase_if(a, [](const CircleAtom& x) { return x.w == 0; });
        std::sort(a.begin(), a.end(), [](auto& p, auto& q) { return p.theta < q.theta; });
        std::vector<CircleAtom> out;
        for (auto& x : a) {
            if (!out.empty() && geodesic_circle(out.back().theta, x.theta) < merge_tol) {
                out.back().w += x.w;
            } else {
                out.push_back(x);
            }
        }
        if (out.size() > 1 && geodesic_circle(out.front().theta, out.back().theta) < merge_tol) {
            out.front().w += out.back().w;
            out.pop_back();
        }
        double s = 0;
        for (auto& x : out) s += x.w;
        if (!(s > 0)) throw config_error("barycenter has no mass");
        for (auto& x : out) x.w /= s;
        return {out};
    }

    size_t size() const { return atoms.size(); }
    CircleMeasure measure() const { return CircleMeasure::from_atoms(atoms); }
};

inline MomentVector moment_map(const std::vector<CircleAtom>& a, int k) {
    if (k <= 0) throw config_error("moment order must be positive");
    MomentVector b(k, cplx(0, 0));
    for (auto& x : a)
        for (int j = 1; j <= k; ++j) b[j - 1] += x.w * std::polar(1.0, double(j) * x.theta);
    return b;
}

inline MomentVector moment_map(const Barycenter& s, int k) { return moment_map(s.atoms, k); }

// bins are integrated with the trapezoidal rule, which is exact for the lumped bin masses
inline MomentVector moment_map(const CircleMeasure& m, int k) { return moment_map(m.as_atoms(), k); }

inline MomentVector phi_k(const WPoint& w) {
    const int k = int(w.size());
    MomentVector b(k, cplx(0, 0));
    for (auto& wi : w) {
        double r = std::abs(wi);
        if (r == 0) continue;
        double th = std::arg(wi);
        for (int j = 1; j <= k; ++j) b[j - 1] += std::polar(r, double(j) * th);
    }
    return b;
}

inline Barycenter barycenter_of(const WPoint& w) {
    std::vector<CircleAtom> a;
    for (auto& wi : w)
        if (std::abs(wi) > 0) a.push_back({std::arg(wi), std::abs(wi)});
    return Barycenter::make(a);
}

inline double l1_norm(const WPoint& w) {
    double s = 0;
    for (auto& x : w) s += std::abs(x);
    return s;
}

inline double distance(const MomentVector& a, const MomentVector& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

// Real Jacobian of Phi_k. Unknowns (x_1..x_k, y_1..y_k); rows (Re b_1, Im b_1, Re b_2, ...).
inline Eigen::MatrixXd phi_jacobian(const WPoint& w) {
    const int k = int(w.size());
    Eigen::MatrixXd J(2 * k, 2 * k);
    for (int i = 0; i < k; ++i) {
        double th = std::abs(w[i]) > 0 ? std::arg(w[i]) : 0.0;
        double c = std::cos(th), s = std::sin(th);
        for (int j = 1; j <= k; ++j) {
            cplx e = std::polar(1.0, double(j) * th);
            cplx dx = e * cplx(c, -double(j) * s);
            cplx dy = e * cplx(s, double(j) * c);
            J(2 * (j - 1), i) = dx.real();
            J(2 * (j - 1) + 1, i) = dx.imag();
            J(2 * (j - 1), k + i) = dy.real();
            J(2 * (j - 1) + 1, k + i) = dy.imag();
        }
    }
    return J;
}

inline Eigen::MatrixXd a2k_matrix(const std::vector<double>& th) {
    const int k = int(th.size());
    Eigen::MatrixXd A(2 * k, 2 * k);
    for (int m = 1; m <= k; ++m)
        for (int j = 0; j < k; ++j) {
            double c = std::cos(m * th[j]), s = std::sin(m * th[j]);
            A(2 * m - 2, j) = c;
            A(2 * m - 2, k + j) = -m * s;
            A(2 * m - 1, j) = s;
            A(2 * m - 1, k + j) = m * c;
        }
    return A;
}

inline double det_A2k(const std::vector<double>& th) {
    if (th.empty()) throw config_error("det_A2k needs at least one angle");
    return a2k_matrix(th).determinant();
}

inline MomentVector homotopy_H(const WPoint& w, double s) {
    if (s < 0 || s > 1) throw config_error("homotopy parameter outside [0,1]");
    const int k = int(w.size());
    MomentVector h(k, cplx(0, 0));
    double pref = 1.0 / (s * k + (1.0 - s));
    for (auto& wi : w) {
        double r = std::abs(wi);
        if (r == 0) continue;
        cplx z = wi / (s + (1.0 - s) * r);
        cplx p = wi;
        for (int j = 1; j <= k; ++j) {
            h[j - 1] += pref * p;
            p *= z;
        }
    }
    return h;
}

namespace detail {

inline Eigen::VectorXd to_real(const MomentVector& b) {
    Eigen::VectorXd v(2 * b.size());
    for (size_t j = 0; j < b.size(); ++j) {
        v(2 * j) = b[j].real();
        v(2 * j + 1) = b[j].imag();
    }
    return v;
}

inline WPoint w_from_real(const Eigen::VectorXd& v) {
    const size_t k = size_t(v.size() / 2);
    WPoint w(k);
    for (size_t i = 0; i < k; ++i) w[i] = cplx(v(i), v(k + i));
    return w;
}

inline Eigen::VectorXd w_to_real(const WPoint& w) {
    const size_t k = w.size();
    Eigen::VectorXd v(2 * k);
    for (size_t i = 0; i < k; ++i) {
        v(i) = w[i].real();
        v(k + i) = w[i].imag();
    }
    return v;
}

// point of the closed region sum |w_i| <= 1 from 2k numbers in [0,1)
inline WPoint region_point(const std::vector<double>& u, int k) {
    std::vector<double> cuts(u.begin() + 1, u.begin() + k);
    std::sort(cuts.begin(), cuts.end());
    double scale = std::pow(u[0], 1.0 / (2.0 * k));
    WPoint w(k);
    double prev = 0;
    for (int i = 0; i < k; ++i) {
        double next = i + 1 < k ? cuts[i] : 1.0;
        w[i] = std::polar(scale * (next - prev), two_pi * u[k + i]);
        prev = next;
    }
    return w;
}

}  // namespace detail

struct NewtonResult {
    WPoint w;
    double residual = INFINITY;
    int iterations = 0;
    bool converged = false;
};

// Damped Newton on Phi_k(w) = b in real coordinates, Levenberg-Marquardt ridge near singular Jacobians.
inline NewtonResult solve_phi(const MomentVector& b, WPoint w0, double tol = 1e-12, int max_iter = 60) {
    const Eigen::VectorXd target = detail::to_real(b);
    Eigen::VectorXd x = detail::w_to_real(w0);
    auto resid = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return detail::to_real(phi_k(detail::w_from_real(v))) - target;
    };
    Eigen::VectorXd r = resid(x);
    double rn = r.norm();
    NewtonResult out;
    int it = 0;
    for (; it < max_iter && rn > tol; ++it) {
        Eigen::MatrixXd J = phi_jacobian(detail::w_from_real(x));
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        Eigen::VectorXd dx;
        double rc = lu.rcond();
        if (lu.isInvertible() && rc > 1e-12) {
            dx = -lu.solve(r);
        } else {
            Eigen::MatrixXd N = J.transpose() * J;
            N.diagonal().array() += 1e-10 * std::max(1.0, N.diagonal().maxCoeff());
            dx = -N.ldlt().solve(J.transpose() * r);
        }
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            Eigen::VectorXd xn = x + step * dx;
            Eigen::VectorXd rnew = resid(xn);
            double nn = rnew.norm();
            if (nn < (1.0 - 1e-4 * step) * rn || nn <= tol) {
                x = xn;
                r = rnew;
                rn = nn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    out.w = detail::w_from_real(x);
    out.residual = rn;
    out.iterations = it;
    out.converged = rn <= tol;
    return out;
}

// Deterministic start points: Halton sequence with a seeded Cranley-Patterson shift.
inline std::vector<WPoint> region_starts(int k, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> shift(2 * k);
    for (auto& s : shift) s = rng.uniform();
    std::vector<WPoint> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> u(2 * k);
        for (int d = 0; d < 2 * k; ++d) {
            double v = radical_inverse(std::uint64_t(i + 1), small_primes[d]) + shift[d];
            u[d] = v - std::floor(v);
        }
        if (u[0] == 0) u[0] = 0.5;
        out.push_back(detail::region_point(u, k));
    }
    return out;
}

struct ProjectionError : compute_error {
    double best;
    ProjectionError(const std::string& m, double b) : compute_error(m), best(b) {}
};

namespace detail {

inline cplx moment_at(const MomentVector& b, int j) {
    if (j == 0) return 1.0;
    if (j > 0) return b[j - 1];
    return std::conj(b[-j - 1]);
}

// Gauss-Newton polish of (theta_i, t_i) against moments m_0..m_k
inline void polish_atoms(std::vector<CircleAtom>& at, const MomentVector& b, int iters = 8) {
    const int n = int(at.size()), k = int(b.size());
    auto residual = [&](const std::vector<CircleAtom>& a) {
        Eigen::VectorXd r(2 * (k + 1));
        for (int j = 0; j <= k; ++j) {
            cplx s = 0;
            for (auto& x : a) s += x.w * std::polar(1.0, double(j) * x.theta);
            s -= moment_at(b, j);
            r(2 * j) = s.real();
            r(2 * j + 1) = s.imag();
        }
        return r;
    };
    Eigen::VectorXd r = residual(at);
    for (int it = 0; it < iters; ++it) {
        Eigen::MatrixXd J(2 * (k + 1), 2 * n);
        for (int j = 0; j <= k; ++j)
            for (int i = 0; i < n; ++i) {
                cplx e = std::polar(1.0, double(j) * at[i].theta);
                cplx dth = at[i].w * cplx(0, double(j)) * e;
                J(2 * j, i) = dth.real();
                J(2 * j + 1, i) = dth.imag();
                J(2 * j, n + i) = e.real();
                J(2 * j + 1, n + i) = e.imag();
            }
        Eigen::VectorXd d = J.colPivHouseholderQr().solve(-r);
        auto trial = at;
        for (int i = 0; i < n; ++i) {
            trial[i].theta += d(i);
            trial[i].w += d(n + i);
        }
        Eigen::VectorXd rt = residual(trial);
        if (rt.norm() >= r.norm()) break;
        at = trial;
        r = rt;
    }
}

}  // namespace detail

// Prony inversion of the trigonometric moment problem with m_0 = 1.
inline Barycenter invert_moments(const MomentVector& b, double tol = 1e-9) {
    const int k = int(b.size());
    if (k <= 0) throw config_error("empty moment vector");
    double best = INFINITY;
    for (int n = 1; n <= k; ++n) {
        Eigen::MatrixXcd H(k + 1, n + 1);
        for (int p = -n; p <= k - n; ++p)
            for (int q = 0; q <= n; ++q) H(p + n, q) = detail::moment_at(b, q + p);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeFullV);
        Eigen::VectorXcd c = svd.matrixV().col(n);
        if (std::abs(c(n)) < 1e-14) continue;
        std::vector<double> th;
        if (n == 1) {
            th.push_back(std::arg(-c(0) / c(1)));
        } else {
            Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
            for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
            for (int i = 0; i < n; ++i) C(i, n - 1) = -c(i) / c(n);
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
            for (int i = 0; i < n; ++i) th.push_back(std::arg(es.eigenvalues()(i)));
        }
        // weights by least squares on m_0..m_k
        Eigen::MatrixXd V(2 * (k + 1), n);
        Eigen::VectorXd rhs(2 * (k + 1));
        for (int j = 0; j <= k; ++j) {
            for (int i = 0; i < n; ++i) {
                cplx e = std::polar(1.0, double(j) * th[i]);
                V(2 * j, i) = e.real();
                V(2 * j + 1, i) = e.imag();
            }
            cplx m = detail::moment_at(b, j);
            rhs(2 * j) = m.real();
            rhs(2 * j + 1) = m.imag();
        }
        Eigen::VectorXd t = V.colPivHouseholderQr().solve(rhs);
        double neg = 0, s = 0;
        for (int i = 0; i < n; ++i) {
            if (t(i) < 0) neg += -t(i);
            t(i) = std::max(0.0, t(i));
            s += t(i);
        }
        if (!(s > 0)) continue;
        std::vector<CircleAtom> at;
        for (int i = 0; i < n; ++i)
            if (t(i) > 0) at.push_back({th[i], t(i) / s});
        detail::polish_atoms(at, b);
        bool bad = false;
        for (auto& x : at)
            if (!(x.w >= 0) || !std::isfinite(x.theta)) bad = true;
        if (bad) continue;
        Barycenter out;
        try {
            out = Barycenter::make(at);
        } catch (const config_error&) {
            continue;
        }
        double res = distance(moment_map(out, k), b);
        best = std::min(best, res);
        if (res <= tol && neg <= tol) return out;
    }
    throw ProjectionError("not on S_k within tolerance (best residual " + std::to_string(best) + ")", best);
}

enum class Region { interior, boundary, exterior, unresolved };

inline const char* region_name(Region r) {
    switch (r) {
        case Region::interior: return "interior";
        case Region::boundary: return "boundary";
        case Region::exterior: return "exterior";
        default: return "unresolved";
    }
}

struct Classification {
    Region region = Region::unresolved;
    WPoint witness;
    double residual = INFINITY;
    double l1 = 0;
};

inline Classification classify_point(const MomentVector& b, double tol = 1e-9, int n_starts = 64,
                                     std::uint64_t seed = 1) {
    const int k = int(b.size());
    Classification c;
    double bn = 0;
    for (auto& x : b) bn += std::norm(x);
    if (std::sqrt(bn) <= tol) {
        c.region = Region::interior;
        c.witness.assign(k, cplx(0, 0));
        c.residual = std::sqrt(bn);
        return c;
    }
    for (auto& w0 : region_starts(k, n_starts, seed)) {
        auto r = solve_phi(b, w0, 1e-13);
        if (r.residual < c.residual) {
            c.residual = r.residual;
            c.witness = r.w;
        }
        if (r.converged) break;
    }
    if (c.residual > tol) {
        c.region = Region::unresolved;
        return c;
    }
    c.l1 = l1_norm(c.witness);
    if (std::abs(c.l1 - 1.0) <= tol * 10)
        c.region = Region::boundary;
    else
        c.region = c.l1 < 1.0 ? Region::interior : Region::exterior;
    return c;
}

struct Projection {
    MomentVector point;
    Barycenter barycenter;
    double scale = 1;  // sum |w_i| of the preimage
};

inline Projection project_Xi(const MomentVector& b, double eps_proj = 0.05, int n_starts = 64,
                             std::uint64_t seed = 1) {
    const int k = int(b.size());
    NewtonResult best;
    for (auto& w0 : region_starts(k, n_starts, seed)) {
        auto r = solve_phi(b, w0, 1e-13);
        if (r.residual < best.residual) best = r;
        if (r.converged) break;
    }
    if (!(best.residual < 1e-9)) throw compute_error("outside N_k: no preimage found");
    double s = l1_norm(best.w);
    if (std::abs(s - 1.0) > eps_proj) throw compute_error("outside N_k");
    WPoint w = best.w;
    for (auto& x : w) x /= s;
    return {phi_k(w), barycenter_of(w), s};
}

inline Projection project_Xi(const CircleMeasure& m, int k, double eps_proj = 0.05) {
    return project_Xi(moment_map(m, k), eps_proj);
}

inline Projection project_Xi(const DiskDensity& f, int k, double eps_proj = 0.05) {
    return project_Xi(angular_pushforward(f), k, eps_proj);
}

struct PreimageCount {
    int count = 0;
    std::vector<WPoint> solutions;
    bool lower_bound = true;  // true when fewer than k! were found
};

inline long factorial(int k) {
    long f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

inline PreimageCount count_preimages(const MomentVector& b, int n_starts, std::uint64_t seed,
                                     double merge_tol = 1e-6) {
    const int k = int(b.size());
    std::vector<std::pair<double, WPoint>> found;
    for (auto& w0 : region_starts(k, n_starts, seed)) {
        auto r = solve_phi(b, w0, 1e-12);
        if (!r.converged) continue;
        found.push_back({r.residual, r.w});
    }
    // deterministic merge order: residual, then lexicographic
    auto lex = [](const WPoint& a, const WPoint& c) {
        for (size_t i = 0; i < a.size(); ++i) {
            if (a[i].real() != c[i].real()) return a[i].real() < c[i].real();
            if (a[i].imag() != c[i].imag()) return a[i].imag() < c[i].imag();
        }
        return false;
    };
    std::sort(found.begin(), found.end(), [&](auto& p, auto& q) {
        if (p.first != q.first) return p.first < q.first;
        return lex(p.second, q.second);
    });
    PreimageCount out;
    for (auto& [res, w] : found) {
        bool dup = false;
        for (auto& s : out.solutions) {
            double d = 0;
            for (size_t i = 0; i < w.size(); ++i) d = std::max(d, std::abs(w[i] - s[i]));
            if (d < merge_tol) {
                dup = true;
                break;
            }
        }
        if (!dup) out.solutions.push_back(w);
    }
    std::sort(out.solutions.begin(), out.solutions.end(), lex);
    out.count = int(out.solutions.size());
    out.lower_bound = out.count < factorial(k);
    return out;
}

struct ZeroSearch {
    int starts = 0;
    int nontrivial_zeros = 0;     // converged points with |Phi| < floor and |w| > w_tol
    double min_sphere_residual = INFINITY;  // min |Phi(w)| over |w| = 1 found by local minimisation
    WPoint argmin;
};

// Looks for zeros of Phi_k: Newton on Phi = 0 from every start, then local minimisation of
// |Phi| on the unit sphere (Phi is positively 1-homogeneous, so a nonzero zero shows up there).
inline ZeroSearch search_phi_zeros(int k, int n_starts, std::uint64_t seed, double floor = 1e-8) {
    ZeroSearch z;
    z.starts = n_starts;
    MomentVector zero(k, cplx(0, 0));
    for (auto& w0 : region_starts(k, n_starts, seed)) {
        auto r = solve_phi(zero, w0, 1e-14, 20);
        if (r.residual < floor && l1_norm(r.w) > 1e-6) ++z.nontrivial_zeros;

        Eigen::VectorXd v = detail::w_to_real(w0);
        v /= v.norm();
        double lam = 1e-3;
        auto f = [&](const Eigen::VectorXd& x) {
            return detail::to_real(phi_k(detail::w_from_real(x / x.norm())));
        };
        Eigen::VectorXd fv = f(v);
        for (int it = 0; it < 100; ++it) {
            Eigen::MatrixXd J = phi_jacobian(detail::w_from_real(v));
            // tangent projection: d/dv Phi(v/|v|) at |v| = 1
            Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2 * k, 2 * k) - v * v.transpose();
            Eigen::MatrixXd Jt = J * P;
            Eigen::MatrixXd N = Jt.transpose() * Jt;
            Eigen::VectorXd g = Jt.transpose() * fv;
            bool improved = false;
            for (int h = 0; h < 20; ++h) {
                Eigen::MatrixXd A = N;
                A.diagonal().array() += lam;
                Eigen::VectorXd d = -A.ldlt().solve(g);
                Eigen::VectorXd vn = v + d;
                vn /= vn.norm();
                Eigen::VectorXd fn = f(vn);
                if (fn.norm() < fv.norm()) {
                    v = vn;
                    fv = fn;
                    lam = std::max(lam * 0.3, 1e-12);
                    improved = true;
                    break;
                }
                lam *= 10;
            }
            if (!improved || g.norm() < 1e-13) break;
        }
        double rn = fv.norm();
        if (rn < floor) ++z.nontrivial_zeros;
        if (rn < z.min_sphere_residual) {
            z.min_sphere_residual = rn;
            z.argmin = detail::w_from_real(v);
        }
    }
    return z;
}

}  // namespace liouville
