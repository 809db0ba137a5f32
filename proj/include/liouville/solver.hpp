#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "functionals.hpp"

namespace liouville {

// y'' = -A W(t) e^y / (c * int W e^y) on a uniform grid t_0..t_M,
// y'(t_0) = slope_left, y(t_M) = 0. The integral includes analytic tails
// W(t_0)e^{y_0}/tail_left and W(t_M)e^{y_M}/tail_right when the rates are positive.
struct CylinderBVP {
    double t0 = -30, t1 = 0;
    int M = 4096;
    std::function<double(double)> log_w;
    double A = 1;
    double slope_left = 0;
    double tail_left = 0;
    double tail_right = 0;
    double mass_factor = 1;

    double h() const { return (t1 - t0) / M; }
    double t(int i) const { return t0 + (t1 - t0) * double(i) / double(M); }
};

struct CylinderState {
    std::vector<double> y;  // M+1 values, y[M] = 0
    double L = 0;           // log(mass_factor * int W e^y)
    double residual = INFINITY;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

namespace detail {

// 4th-order end-corrected trapezoid weights (3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8)
inline std::vector<double> gregory_weights(int M, double h) {
    std::vector<double> q(M + 1, h);
    if (M < 6) {
        q[0] = q[M] = 0.5 * h;
        return q;
    }
    const double e[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    for (int i = 0; i < 3; ++i) {
        q[i] = e[i] * h;
        q[M - i] = e[i] * h;
    }
    return q;
}

struct BvpEval {
    Eigen::VectorXd R;     // residual, size M+1 (M rows for y_0..y_{M-1}, last for L)
    std::vector<double> g;  // g_i = -A W_i e^{y_i - L}
    std::vector<double> f;  // f_i = W_i e^{y_i - Lmax} scaled
    double logI = 0;        // log(mass_factor * integral)
};

inline BvpEval bvp_eval(const CylinderBVP& p, const std::vector<double>& lw, const std::vector<double>& q,
                        const std::vector<double>& y, double L) {
    const int M = p.M;
    const double h = p.h();
    BvpEval e;
    e.g.resize(M + 1);
    for (int i = 0; i <= M; ++i) e.g[i] = -p.A * std::exp(lw[i] + y[i] - L);
    LogSum ls;
    for (int i = 0; i <= M; ++i) ls.add(std::log(q[i]) + lw[i] + y[i]);
    if (p.tail_left > 0) ls.add(lw[0] + y[0] - std::log(p.tail_left));
    if (p.tail_right > 0) ls.add(lw[M] + y[M] - std::log(p.tail_right));
    e.logI = ls.value() + std::log(p.mass_factor);
    e.R.resize(M + 1);
    // Neumann closure, local error O(h^5): y1 - y0 = h y' + h^2 (7 g0 + 6 g1 - g2)/24
    e.R(0) = (y[1] - y[0]) / h - p.slope_left - h * (7 * e.g[0] + 6 * e.g[1] - e.g[2]) / 24.0;
    for (int i = 1; i < M; ++i)
        e.R(i) = (y[i + 1] - 2 * y[i] + y[i - 1]) / (h * h) - (e.g[i + 1] + 10 * e.g[i] + e.g[i - 1]) / 12.0;
    e.R(M) = L - e.logI;
    return e;
}

// scale-free residual: second differences in h^2 units, Neumann row in h units
inline double scaled_norm(const Eigen::VectorXd& R, double h) {
    const int M = int(R.size()) - 1;
    double m = std::abs(R(0)) * h;
    for (int i = 1; i < M; ++i) m = std::max(m, std::abs(R(i)) * h * h);
    return std::max(m, std::abs(R(M)));
}

}  // namespace detail

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 80;
    double max_step = 4.0;
    double y_cap = 200.0;
};

inline CylinderState solve_cylinder(const CylinderBVP& p, std::vector<double> y0, const NewtonOptions& opt = {}) {
    const int M = p.M;
    const double h = p.h();
    if (M < 8) throw config_error("cylinder grid needs at least 8 intervals");
    std::vector<double> lw(M + 1);
    for (int i = 0; i <= M; ++i) lw[i] = p.log_w(p.t(i));
    const auto q = detail::gregory_weights(M, h);

    CylinderState s;
    if (y0.size() != size_t(M + 1)) y0.assign(M + 1, 0.0);
    y0[M] = 0.0;
    s.y = std::move(y0);
    {
        LogSum ls;
        for (int i = 0; i <= M; ++i) ls.add(std::log(q[i]) + lw[i] + s.y[i]);
        if (p.tail_left > 0) ls.add(lw[0] + s.y[0] - std::log(p.tail_left));
        if (p.tail_right > 0) ls.add(lw[M] + s.y[M] - std::log(p.tail_right));
        s.L = ls.value() + std::log(p.mass_factor);
    }
    auto e = detail::bvp_eval(p, lw, q, s.y, s.L);
    double rn = detail::scaled_norm(e.R, h);

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(size_t(5 * (M + 1) + 2 * M));
    int it = 0;
    for (; it < opt.max_iter && rn > opt.tol; ++it) {
        trip.clear();
        const auto& g = e.g;
        const double ih2 = 1.0 / (h * h);
        // Neumann row
        trip.emplace_back(0, 0, -1.0 / h - h * 7 * g[0] / 24.0);
        trip.emplace_back(0, 1, 1.0 / h - h * 6 * g[1] / 24.0);
        trip.emplace_back(0, 2, h * g[2] / 24.0);
        trip.emplace_back(0, M, h * (7 * g[0] + 6 * g[1] - g[2]) / 24.0);
        for (int i = 1; i < M; ++i) {
            trip.emplace_back(i, i - 1, ih2 - g[i - 1] / 12.0);
            trip.emplace_back(i, i, -2 * ih2 - 10 * g[i] / 12.0);
            if (i + 1 < M) trip.emplace_back(i, i + 1, ih2 - g[i + 1] / 12.0);
            trip.emplace_back(i, M, (g[i + 1] + 10 * g[i] + g[i - 1]) / 12.0);
        }
        // L row: L - log(c * (sum q_i W_i e^{y_i} + tails))
        {
            const double ls = std::log(p.mass_factor) - e.logI;
            for (int i = 0; i < M; ++i) {
                double d = q[i] * std::exp(lw[i] + s.y[i] + ls);
                if (i == 0 && p.tail_left > 0) d += std::exp(lw[0] + s.y[0] + ls) / p.tail_left;
                if (d != 0) trip.emplace_back(M, i, -d);
            }
            trip.emplace_back(M, M, 1.0);
        }
        Eigen::SparseMatrix<double> J(M + 1, M + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) {
            s.message = "singular Jacobian";
            break;
        }
        Eigen::VectorXd d = lu.solve(-e.R);
        if (!d.allFinite()) {
            s.message = "non-finite Newton step";
            break;
        }
        // affine-invariant monotonicity test on the simplified Newton correction
        const double dnorm = d.cwiseAbs().maxCoeff();
        double step = dnorm > opt.max_step ? opt.max_step / dnorm : 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            std::vector<double> yn = s.y;
            for (int i = 0; i < M; ++i) yn[i] += step * d(i);
            double Ln = s.L + step * d(M);
            double ymax = *std::max_element(yn.begin(), yn.end());
            if (ymax < opt.y_cap) {
                auto en = detail::bvp_eval(p, lw, q, yn, Ln);
                double nn = detail::scaled_norm(en.R, h);
                bool ok = std::isfinite(nn) && nn <= opt.tol;
                if (!ok && std::isfinite(nn)) {
                    Eigen::VectorXd db = lu.solve(-en.R);
                    ok = db.allFinite() && db.cwiseAbs().maxCoeff() <= (1 - 0.25 * step) * dnorm;
                }
                if (ok) {
                    s.y = std::move(yn);
                    s.L = Ln;
                    e = std::move(en);
                    rn = nn;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            s.message = "line search failed";
            break;
        }
    }
    s.iterations = it;
    s.residual = rn;
    s.converged = rn <= opt.tol;
    if (!s.converged && s.message.empty()) s.message = "iteration limit";
    return s;
}

// ---- disk ----

struct RadialSolution {
    double alpha = 0, rho = 0;
    double t_min = -30;
    std::vector<double> t;  // uniform cylinder grid, t = log r, last node t = 0
    std::vector<double> u;
    double residual = INFINITY;
    double mass = 0;  // int_B |x|^{2 alpha} e^{2u} dx
    bool converged = false;
    int iterations = 0;
    std::string message;

    double max_u() const { return *std::max_element(u.begin(), u.end()); }
};

inline double beta_of(double alpha) { return 2.0 * (1.0 + alpha); }

inline CylinderBVP disk_problem(double rho, double alpha, int M, double t_min) {
    CylinderBVP p;
    p.t0 = t_min;
    p.t1 = 0;
    p.M = M;
    const double b = beta_of(alpha);
    p.log_w = [b](double t) { return b * t; };
    p.A = rho / pi;
    p.slope_left = 0;
    p.tail_left = b;
    return p;
}

inline std::vector<double> cylinder_grid(double t0, double t1, int M) {
    std::vector<double> t(M + 1);
    for (int i = 0; i <= M; ++i) t[i] = t0 + (t1 - t0) * double(i) / double(M);
    return t;
}

inline RadialSolution solve_radial(double rho, double alpha, int M = 4096, const std::vector<double>& u0 = {},
                                   double t_min = -30, const NewtonOptions& opt = {}) {
    if (!(rho > 0)) throw config_error("rho must be positive");
    if (!(alpha >= 0)) throw config_error("alpha must be nonnegative");
    auto p = disk_problem(rho, alpha, M, t_min);
    std::vector<double> y0;
    if (u0.size() == size_t(M + 1))
        for (double v : u0) y0.push_back(2 * v);
    auto s = solve_cylinder(p, y0, opt);
    RadialSolution sol;
    sol.alpha = alpha;
    sol.rho = rho;
    sol.t_min = t_min;
    sol.t = cylinder_grid(t_min, 0, M);
    sol.u.resize(M + 1);
    for (int i = 0; i <= M; ++i) sol.u[i] = 0.5 * s.y[i];
    sol.residual = s.residual;
    sol.converged = s.converged;
    sol.iterations = s.iterations;
    sol.message = s.message;
    sol.mass = two_pi * std::exp(s.L);
    if (!sol.converged && rho >= 4 * pi * (1 + alpha))
        sol.message += " (no solution expected for rho >= 4pi(1+alpha))";
    return sol;
}

// Discrete residual of a radial solution re-evaluated from scratch (scaled as in the solver).
inline double radial_residual(const RadialSolution& s) {
    const int M = int(s.t.size()) - 1;
    auto p = disk_problem(s.rho, s.alpha, M, s.t_min);
    std::vector<double> lw(M + 1), y(M + 1);
    for (int i = 0; i <= M; ++i) {
        lw[i] = p.log_w(p.t(i));
        y[i] = 2 * s.u[i];
    }
    auto q = detail::gregory_weights(M, p.h());
    LogSum ls;
    for (int i = 0; i <= M; ++i) ls.add(std::log(q[i]) + lw[i] + y[i]);
    ls.add(lw[0] + y[0] - std::log(p.tail_left));
    auto e = detail::bvp_eval(p, lw, q, y, ls.value());
    return detail::scaled_norm(e.R, p.h());
}

// Explicit family u = log(1+mu) - log(1+mu r^beta), beta = 2(1+alpha).
// In t = log r: u_tt = -beta^2 mu e^{beta t}/(1+mu e^{beta t})^2,
// m = int_0^1 s^{2a+1} e^{2u} ds = (1+mu)/beta, rho = 4pi(1+alpha) mu/(1+mu).
struct ExplicitRadial {
    double mu = 1, alpha = 0;
    ExplicitRadial() = default;
    ExplicitRadial(double m, double a) : mu(m), alpha(a) {}
    double beta() const { return beta_of(alpha); }
    double rho() const { return 4 * pi * (1 + alpha) * mu / (1 + mu); }
    double u(double t) const {
        double x = std::log(mu) + beta() * t;
        double l = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        return std::log1p(mu) - l;
    }
    double u_t(double t) const {
        double x = std::log(mu) + beta() * t;
        return -beta() / (1 + std::exp(-x));
    }
    double u_tt(double t) const {
        double x = std::log(mu) + beta() * t;
        double s = 1 / (1 + std::exp(-x));
        return -beta() * beta() * s * (1 - s);
    }
    double mass_closed() const { return (1 + mu) / beta(); }
};

struct OracleCheck {
    double ode_residual = INFINITY;
    double rho_quadrature = 0;
    double rho_closed = 0;
    double mass_quadrature = 0;
    double mass_closed = 0;
};

// Verifies the explicit family against the ODE with quadrature-computed mass and rho.
inline OracleCheck verify_explicit(const ExplicitRadial& e, const std::vector<double>& t) {
    using boost::math::quadrature::gauss_kronrod;
    OracleCheck c;
    const double b = e.beta();
    const double tc = -std::log(e.mu) / b;  // profile centre
    auto dens = [&](double s) { return std::exp(b * s + 2 * e.u(s)); };
    auto flux = [&](double s) { return -e.u_tt(s); };
    auto integrate = [&](auto f) {
        double lo = std::min(tc - 40.0 / b, -1.0);
        double acc = gauss_kronrod<double, 61>::integrate(f, -INFINITY, lo, 10, 1e-12);
        double a = lo;
        const double step = 2.0 / b;
        while (a < 0) {
            double bnd = std::min(0.0, a + step);
            acc += gauss_kronrod<double, 61>::integrate(f, a, bnd, 10, 1e-12);
            a = bnd;
        }
        return acc;
    };
    c.mass_quadrature = integrate(dens);
    c.mass_closed = e.mass_closed();
    c.rho_quadrature = two_pi * integrate(flux);
    c.rho_closed = e.rho();
    double r = 0;
    for (double s : t) {
        double rhs = -c.rho_quadrature * std::exp(b * s + 2 * e.u(s)) / (two_pi * c.mass_quadrature);
        r = std::max(r, std::abs(e.u_tt(s) - rhs));
    }
    c.ode_residual = r;
    return c;
}

inline RadialSolution explicit_radial(double mu, double alpha, int M = 4096, double t_min = -30) {
    if (!(mu > 0)) throw config_error("mu must be positive");
    ExplicitRadial e{mu, alpha};
    RadialSolution s;
    s.alpha = alpha;
    s.t_min = t_min;
    s.t = cylinder_grid(t_min, 0, M);
    auto chk = verify_explicit(e, s.t);
    if (!(chk.ode_residual <= 1e-10) || std::abs(chk.rho_quadrature - chk.rho_closed) > 1e-10 * chk.rho_closed)
        throw verify_error("explicit radial oracle failed its residual check");
    s.rho = e.rho();
    s.u.resize(M + 1);
    for (int i = 0; i <= M; ++i) s.u[i] = e.u(s.t[i]);
    s.residual = chk.ode_residual;
    s.converged = true;
    s.mass = two_pi * chk.mass_quadrature;
    return s;
}

struct Pohozaev {
    double lhs = 0, rhs = 0, residual = 0, margin = 0;
    double flux = 0;  // -int_{dB} u_nu
};

// lhs = -pi u_r(1)^2, rhs = pi rho / m - (1+alpha) rho with m = int_B |x|^{2a} e^{2u};
// second-order one-sided flux and trapezoidal mass, so the residual is O(h^2).
inline Pohozaev pohozaev_residual_disk(const RadialSolution& s) {
    if (!s.converged) throw compute_error("pohozaev check needs a converged solution");
    const int M = int(s.t.size()) - 1;
    const double h = s.t[1] - s.t[0];
    const double b = beta_of(s.alpha);
    double ur = (3 * s.u[M] - 4 * s.u[M - 1] + s.u[M - 2]) / (2 * h);
    double m = 0;
    for (int i = 0; i <= M; ++i) m += (i == 0 || i == M ? 0.5 : 1.0) * h * std::exp(b * s.t[i] + 2 * s.u[i]);
    m += std::exp(b * s.t[0] + 2 * s.u[0]) / b;
    m *= two_pi;
    Pohozaev p;
    p.lhs = -pi * ur * ur;
    p.rhs = pi * s.rho / m - (1 + s.alpha) * s.rho;
    p.residual = std::abs(p.lhs - p.rhs);
    p.margin = (1 + s.alpha) * s.rho - s.rho * s.rho / (4 * pi);
    p.flux = -two_pi * ur;
    return p;
}

// ---- continuation ----

enum class Termination { reached_end, blow_up, newton_failure };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::reached_end: return "reached_end";
        case Termination::blow_up: return "blow_up";
        default: return "newton_failure";
    }
}

struct BranchPoint {
    double rho = 0;
    RadialSolution sol;
};

struct Branch {
    double alpha = 0;
    std::vector<BranchPoint> points;
    Termination reason = Termination::reached_end;
    double rho_star = 0;         // midpoint of the last bracket when blow-up is declared
    double bracket_lo = 0, bracket_hi = 0;
    double nearest_lambda = 0;   // nearest element of the critical set
    double threshold = 0;        // 4 pi (1 + alpha)
    double rel_distance = 0;     // |rho* - threshold| / threshold
};

struct ContinuationOptions {
    int M = 4096;
    double t_min = -30;
    double u_blow = 25;
    int max_halvings = 6;
    NewtonOptions newton{};
};

inline Branch continuation(double rho_start, double rho_end, double alpha, int n_steps,
                           const ContinuationOptions& opt = {}) {
    if (!(rho_start > 0 && rho_start < rho_end)) throw config_error("need 0 < rho_start < rho_end");
    if (n_steps < 1) throw config_error("need at least one continuation step");
    Branch br;
    br.alpha = alpha;
    br.threshold = 4 * pi * (1 + alpha);
    const double base = (rho_end - rho_start) / n_steps;

    auto first = solve_radial(rho_start, alpha, opt.M, {}, opt.t_min, opt.newton);
    if (!first.converged) {
        br.reason = Termination::newton_failure;
        br.rho_star = rho_start;
        br.bracket_lo = br.bracket_hi = rho_start;
    } else {
        br.points.push_back({rho_start, first});
        double step = base;
        double rho = rho_start;
        bool done = false;
        while (!done) {
            if (rho >= rho_end) {
                br.reason = Termination::reached_end;
                break;
            }
            bool ok = false;
            double tried = rho;
            for (int k = 0; k <= opt.max_halvings; ++k) {
                double target = std::min(rho + step, rho_end);
                tried = target;
                // secant predictor
                std::vector<double> guess = br.points.back().sol.u;
                if (br.points.size() >= 2) {
                    const auto& a = br.points[br.points.size() - 2];
                    const auto& b = br.points.back();
                    double f = (target - b.rho) / (b.rho - a.rho);
                    for (size_t i = 0; i < guess.size(); ++i) guess[i] += f * (b.sol.u[i] - a.sol.u[i]);
                }
                auto s = solve_radial(target, alpha, opt.M, guess, opt.t_min, opt.newton);
                if (s.converged && s.max_u() > opt.u_blow) {
                    br.reason = Termination::blow_up;
                    br.bracket_lo = rho;
                    br.bracket_hi = target;
                    done = true;
                    ok = true;
                    break;
                }
                if (s.converged) {
                    br.points.push_back({target, std::move(s)});
                    rho = target;
                    ok = true;
                    break;
                }
                if (k < opt.max_halvings) step *= 0.5;
            }
            if (!ok) {
                br.reason = Termination::blow_up;
                br.bracket_lo = rho;
                br.bracket_hi = tried;
                done = true;
            }
        }
        if (br.reason == Termination::reached_end) {
            br.bracket_lo = br.bracket_hi = rho;
        }
        br.rho_star = 0.5 * (br.bracket_lo + br.bracket_hi);
    }
    auto cs = critical_set(alpha > 0 ? std::vector<double>{alpha} : std::vector<double>{},
                           std::max(rho_end, br.rho_star) * 1.5 + 4 * pi);
    double best = INFINITY;
    for (auto& c : cs)
        if (std::abs(c.value - br.rho_star) < best) {
            best = std::abs(c.value - br.rho_star);
            br.nearest_lambda = c.value;
        }
    br.rel_distance = std::abs(br.rho_star - br.threshold) / br.threshold;
    return br;
}

// ---- sphere, axisymmetric ----

// v'' = -W e^v on the cylinder t = log|z|, W = e^{(2+2a1)t} (1+e^{2t})^{-gamma},
// gamma = 2 + a1 + a2 - beta, with int W e^v dt = 2 beta.
struct SphereSolution {
    double beta = 0, alpha1 = 0, alpha2 = 0, gamma = 0;
    std::vector<double> t;
    std::vector<double> v;
    double residual = INFINITY;
    bool converged = false;
    bool symmetric_reduction = false;
    bool expected_infeasible = false;
    std::string message;
};

inline double sphere_log_w(double t, double a1, double gamma) {
    double l = t > 0 ? 2 * t + std::log1p(std::exp(-2 * t)) : std::log1p(std::exp(2 * t));
    return (2 + 2 * a1) * t - gamma * l;
}

inline bool necessary_condition_sphere(double rho, double a1, double a2) {
    if (!(a1 > 0 && a2 > 0)) throw config_error("alpha must be positive");
    if (!(a1 < a2)) throw config_error("necessary condition is stated for alpha1 < alpha2");
    if (!(rho > 0)) throw config_error("rho must be positive");
    return rho < 4 * pi * (1 + a1) || rho > 4 * pi * (1 + a2);
}

inline SphereSolution sphere_axisym_solve(double beta, double a1, double a2, double T = 30, int M = 8192,
                                          const NewtonOptions& opt = {}) {
    if (!(beta > 0 && a1 >= 0 && a2 >= 0)) throw config_error("need beta > 0 and alpha >= 0");
    SphereSolution out;
    out.beta = beta;
    out.alpha1 = a1;
    out.alpha2 = a2;
    out.gamma = 2 + a1 + a2 - beta;
    const double gamma = out.gamma;
    const double rho = 2 * pi * beta;
    if (a1 != a2) {
        double lo = std::min(a1, a2), hi = std::max(a1, a2);
        out.expected_infeasible = !(rho < 4 * pi * (1 + lo) || rho > 4 * pi * (1 + hi));
    } else {
        out.expected_infeasible = std::abs(rho - 4 * pi * (1 + a1)) < 1e-12 && std::abs(gamma) > 1e-12;
    }
    const bool degenerate = std::abs(gamma) < 1e-12 && a1 == a2;
    CylinderBVP p;
    p.A = 2 * beta;
    p.log_w = [a1, gamma](double t) { return sphere_log_w(t, a1, gamma); };
    p.M = M;
    if (degenerate) {
        // dilation-invariant case: impose the t -> -t symmetry v(t) + beta t even
        out.symmetric_reduction = true;
        p.t0 = 0;
        p.t1 = T;
        p.slope_left = -beta;
        p.mass_factor = 2;
        p.tail_right = 2 + 2 * a2;
    } else {
        p.t0 = -T;
        p.t1 = T;
        p.slope_left = 0;
        p.tail_left = 2 + 2 * a1;
        p.tail_right = 2 + 2 * a2;
    }
    std::vector<double> y0(M + 1);
    auto soft = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
    for (int i = 0; i <= M; ++i) y0[i] = -2 * soft(beta * p.t(i)) + 2 * soft(beta * p.t1);
    auto s = solve_cylinder(p, y0, opt);
    out.converged = s.converged;
    out.residual = s.residual;
    out.message = s.message;
    const double shift = std::log(2 * beta) - s.L;
    if (degenerate) {
        out.t.resize(2 * M + 1);
        out.v.resize(2 * M + 1);
        for (int i = 0; i <= M; ++i) {
            double ti = p.t(i);
            out.t[M + i] = ti;
            out.v[M + i] = s.y[i] + shift;
            out.t[M - i] = -ti;
            out.v[M - i] = s.y[i] + shift + 2 * beta * ti;
        }
    } else {
        out.t = cylinder_grid(-T, T, M);
        out.v.resize(M + 1);
        for (int i = 0; i <= M; ++i) out.v[i] = s.y[i] + shift;
    }
    return out;
}

struct SphereConstraints {
    double lhs1 = 0, rhs1 = 0, lhs2 = 0, rhs2 = 0;
    double mass = 0;  // int W e^v dt, should be 2 beta
};

inline SphereConstraints sphere_constraints(const std::vector<double>& t, const std::vector<double>& v,
                                            double beta, double a1, double a2) {
    const int M = int(t.size()) - 1;
    if (M < 8) throw config_error("too few nodes");
    const double h = t[1] - t[0];
    const double gamma = 2 + a1 + a2 - beta;
    auto q = detail::gregory_weights(M, h);
    double i1 = 0, i2 = 0, mass = 0;
    for (int i = 0; i <= M; ++i) {
        double d = std::exp(sphere_log_w(t[i], a1, gamma) + v[i]);
        if (!std::isfinite(d)) throw compute_error("non-integrable input");
        double s = 1 / (1 + std::exp(-2 * t[i]));  // e^{2t}/(1+e^{2t})
        i1 += q[i] * s * d;
        i2 += q[i] * (1 - s) * d;
        mass += q[i] * d;
    }
    // tails: W e^v ~ e^{(2+2a1)t} on the left, e^{-(2+2a2)t} on the right
    double dl = std::exp(sphere_log_w(t[0], a1, gamma) + v[0]) / (2 + 2 * a1);
    double dr = std::exp(sphere_log_w(t[M], a1, gamma) + v[M]) / (2 + 2 * a2);
    i2 += dl;
    i1 += dr;
    mass += dl + dr;
    SphereConstraints c;
    c.lhs1 = 2 * gamma * two_pi * i1;
    c.lhs2 = 2 * gamma * two_pi * i2;
    c.rhs1 = 4 * pi * beta * (2 * (1 + a1) - beta);
    c.rhs2 = 4 * pi * beta * (2 * (1 + a2) - beta);
    c.mass = mass;
    return c;
}

}  // namespace liouville
