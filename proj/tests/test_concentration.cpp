#include <gtest/gtest.h>

#include <liouville/concentration.hpp>

using namespace liouville;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// cell masses of narrow Gaussians, product of erf differences in (r, r0 theta)
DiskDensity bumps(const PolarGrid& g, const std::vector<Point2>& centres, double w) {
    std::vector<double> m(g.size(), 0.0);
    for (Point2 c : centres) {
        double r0 = norm(c), t0 = std::atan2(c.y, c.x);
        for (size_t i = 0; i < g.n_r(); ++i) {
            double pr = Phi((g.edges[i + 1] - r0) / w) - Phi((g.edges[i] - r0) / w);
            if (pr < 1e-300) continue;
            for (size_t j = 0; j < g.n_theta; ++j) {
                double d = angle_diff(g.theta(j), t0), h = 0.5 * g.dtheta();
                m[g.idx(i, j)] += pr * (Phi(r0 * (d + h) / w) - Phi(r0 * (d - h) / w));
            }
        }
    }
    auto f = DiskDensity::from_cell_masses(g, m);
    f.normalize();
    return f;
}

// f ~ 1/|x|^2 on A(a, b): exact cell masses
DiskDensity log_uniform(const PolarGrid& g, double a, double b) {
    std::vector<double> m(g.size(), 0.0);
    for (size_t i = 0; i < g.n_r(); ++i) {
        double lo = std::max(a, g.edges[i]), hi = std::min(b, g.edges[i + 1]);
        if (hi <= lo) continue;
        for (size_t j = 0; j < g.n_theta; ++j) m[g.idx(i, j)] = std::log(hi / lo);
    }
    auto f = DiskDensity::from_cell_masses(g, m);
    f.normalize();
    return f;
}

AlternativeParams vanishing_params() {
    AlternativeParams p;
    p.k = 1;
    p.C1 = 2;
    p.sigma0 = 0.15;
    return p;
}

}  // namespace

TEST(ConstantC1, ClosedForm) {
    double C0 = 5.0 / 3.0;
    EXPECT_NEAR(constant_C1(32 * 9 * (1 + C0 * C0), 2, C0).value, std::numbers::e, 1e-14);
    EXPECT_GT(constant_C1(0.5, 1, C0).value, constant_C1(1.0, 1, C0).value);
    auto c = constant_C1(1, 1, 1);
    EXPECT_DOUBLE_EQ(c.log_value, 256.0);
    EXPECT_TRUE(c.astronomical);
    EXPECT_THROW(constant_C1(0, 1, 1), config_error);
    EXPECT_NEAR(sigma0_default(0.05, 2, 1, 10), 0.05 / 400 / (12 * std::log(10.0)), 1e-18);
}

TEST(Alternative, SingleBumpConcentrated) {
    auto f = bumps(PolarGrid::uniform(128, 256), {{0.5, 0.0}}, 1e-3);
    AlternativeParams p;
    p.k = 1;
    auto r = detect_alternative(f, p);
    EXPECT_EQ(r.verdict, Verdict::concentrated);
    EXPECT_GT(r.J, 0.999);
}

TEST(Alternative, ThreeBumpsSeparated) {
    std::vector<Point2> c;
    for (int i = 0; i < 3; ++i) c.push_back({0.5 * std::cos(two_pi * i / 3), 0.5 * std::sin(two_pi * i / 3)});
    auto g = PolarGrid::uniform(256, 384);
    auto f = bumps(g, c, 1e-3);
    AlternativeParams p;
    p.k = 2;
    auto r = detect_alternative(f, p);
    ASSERT_EQ(r.verdict, Verdict::separated_points);
    ASSERT_EQ(r.points.size(), 3u);
    for (Point2 x : c) {
        double d = INFINITY;
        for (auto& q : r.points) d = std::min(d, dist(q.p, x));
        EXPECT_LT(d, 0.01);
    }
    EXPECT_GE(r.slack, 0.0);
    auto bad = r;
    bad.params.sigma0 = 0.9;
    EXPECT_THROW(reverify(f, bad), verify_error);
}

TEST(Alternative, LogUniformVanishing) {
    auto g = PolarGrid::log_radial(std::exp2(-24), 1.0, 8, 64);
    auto f = log_uniform(g, 1e-6, 1.0);
    auto r = detect_alternative(f, vanishing_params());
    ASSERT_EQ(r.verdict, Verdict::vanishing);
    EXPECT_DOUBLE_EQ(r.r, std::exp2(-20));
    EXPECT_DOUBLE_EQ(r.R, 1.0);
    EXPECT_NEAR(r.annulus_mass, 1.0, 1e-12);
    // window mass is 2 log C1 / log 1e6 in the interior of the support
    EXPECT_NEAR(r.jj3_max, 2 * std::log(2.0) / std::log(1e6), 1e-9);
    ASSERT_EQ(r.s.size(), 9u);
    // closed-form slice radii: equal steps in log r across the support
    for (int i = 1; i < 8; ++i) EXPECT_NEAR(std::log(r.s[i]), std::log(1e-6) * (1 - i / 8.0), 1e-9);
    auto bad = r;
    bad.s[3] *= 1.01;
    EXPECT_THROW(reverify(f, bad), verify_error);
}

TEST(Alternative, VanishingIsDilationCovariant) {
    auto g = PolarGrid::log_radial(std::exp2(-24), 1.0, 8, 64);
    auto base = detect_alternative(log_uniform(g, 1e-6, 1.0), vanishing_params());
    for (double lam : {0.5, 0.25}) {
        auto r = detect_alternative(log_uniform(g, lam * 1e-6, lam), vanishing_params());
        ASSERT_EQ(r.verdict, Verdict::vanishing);
        EXPECT_NEAR(r.r, lam * base.r, 1e-12 * base.r);
        EXPECT_NEAR(r.R, lam * base.R, 1e-12);
        ASSERT_EQ(r.s.size(), base.s.size());
        for (size_t i = 0; i < r.s.size(); ++i) EXPECT_NEAR(r.s[i], lam * base.s[i], 1e-10 * base.s[i]);
    }
}

TEST(Alternative, RejectsBadParameters) {
    auto f = bumps(PolarGrid::uniform(32, 64), {{0.5, 0.0}}, 1e-2);
    AlternativeParams p;
    p.N = 3;
    EXPECT_THROW(detect_alternative(f, p), config_error);
    p = {};
    p.C1 = 1;
    EXPECT_THROW(detect_alternative(f, p), config_error);
    auto h = f;
    for (auto& v : h.values) v *= 2;
    EXPECT_THROW(detect_alternative(h, {}), config_error);
}

TEST(MRHypotheses, BubbleAtOrigin) {
    const double s = 1e-3;
    auto g = PolarGrid::log_radial(1e-9, 1.0, 8, 32);
    auto u = bubble_field(g, 1 / (s * s), {0, 0});
    auto c = check_mr_hypotheses(u, s, 0.2, 1e-3, SingularConfig::canonical_disk(1.0, 1.0));
    // annulus share ~ log 4 / (2 log(1/s))
    EXPECT_NEAR(c.annulus_energy / c.total_energy, std::log(4.0) / (2 * std::log(1 / s)), 0.02);
    EXPECT_TRUE(c.all());
}

TEST(MRHypotheses, ZeroFieldAndOffCentreBubble) {
    auto cfg = SingularConfig::canonical_disk(1.0, 1.0);
    auto g = PolarGrid::uniform(200, 64);
    auto z = check_mr_hypotheses(DiskField::zeros(g), 0.1, 0.1, 0.01, cfg);
    EXPECT_TRUE(z.energy_ok);
    EXPECT_FALSE(z.inner_ok);
    EXPECT_NEAR(z.inner_mass, 1e-4, 1e-6);
    auto b = check_mr_hypotheses(bubble_field(g, 100, {0.5, 0}), 0.01, 0.5, 0.01, cfg);
    EXPECT_FALSE(b.inner_ok);
    EXPECT_TRUE(b.outer_ok);
    EXPECT_THROW(check_mr_hypotheses(DiskField::zeros(g), 0.3, 0.1, 0.1, cfg), config_error);
}

TEST(Spread, SectorsAndThreshold) {
    auto g = PolarGrid::uniform(16, 64);
    std::vector<double> m(g.size());
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) m[g.idx(i, j)] = g.cell_area(i);
    auto f = DiskDensity::from_cell_masses(g, m);
    f.normalize();
    std::vector<std::vector<size_t>> sec(4);
    for (size_t i = 0; i < g.n_r(); ++i)
        for (size_t j = 0; j < g.n_theta; ++j) sec[j / 16].push_back(g.idx(i, j));
    auto s = check_spread(f, sec, 0.25 * (1 - 1e-12));
    EXPECT_TRUE(s.ok);
    for (double x : s.masses) EXPECT_NEAR(x, 0.25, 1e-12);
    // exact threshold is inclusive: three of the four sectors against their own mass
    std::vector<std::vector<size_t>> three(sec.begin(), sec.begin() + 3);
    double mmin = std::min({s.masses[0], s.masses[1], s.masses[2]});
    EXPECT_TRUE(check_spread(f, three, mmin).ok);
    EXPECT_FALSE(check_spread(f, three, std::nextafter(mmin, 1.0)).ok);
    auto one = bumps(g, {{0.5, 0.1}}, 1e-2);
    EXPECT_FALSE(check_spread(one, sec, 0.2).ok);
    auto ov = sec;
    ov[1].push_back(sec[0][0]);
    EXPECT_THROW(check_spread(f, ov, 0.1), config_error);
    EXPECT_THROW(check_spread(f, sec, 0.3), config_error);
}

TEST(Spread, SphereHemispheres) {
    auto g = SphereGrid::make(16, 32);
    auto f = SphereDensity::from_values(g, std::vector<double>(g.size(), 1.0));
    f.normalize();
    std::vector<std::vector<size_t>> h(2);
    for (size_t i = 0; i < g.n_lat; ++i)
        for (size_t j = 0; j < g.n_lon; ++j) h[i < 8 ? 0 : 1].push_back(g.idx(i, j));
    auto s = check_spread(f, h, 0.49, 0.1);
    EXPECT_TRUE(s.ok);
    EXPECT_NEAR(s.min_distance, g.dcolat(), 1e-12);
    EXPECT_FALSE(check_spread(f, h, 0.49, 0.5).ok);
}

TEST(ImprovedBound, ZeroFieldConstant) {
    auto cfg = SingularConfig::canonical_disk(1.0, 1.0);
    auto r = improved_bound_report(DiskField::zeros(PolarGrid::uniform(64, 32)), 1, 0.1, cfg);
    EXPECT_NEAR(r.C_emp, std::log(pi / 2), 1e-13);
    EXPECT_NEAR(r.rhs_coeff, 1.1 / (8 * pi), 1e-15);
}

TEST(ImprovedBound, RotationInvariant) {
    auto cfg = SingularConfig::canonical_disk(1.0, 1.0);
    auto g = PolarGrid::uniform(64, 96);
    auto fn = [](double phi) {
        return [phi](Point2 x) {
            double c = std::cos(phi), s = std::sin(phi);
            Point2 y{c * x.x + s * x.y, -s * x.x + c * x.y};
            return (1 - x.x * x.x - x.y * x.y) * (2 * y.x + y.x * y.y);
        };
    };
    auto base = improved_bound_report(DiskField::sample(g, fn(0)), 1, 0.1, cfg);
    for (int m : {1, 7, 40}) {
        auto u = DiskField::sample(g, fn(m * g.dtheta()));
        for (auto& b : u.boundary) b = 0;
        auto r = improved_bound_report(u, 1, 0.1, cfg);
        EXPECT_NEAR(r.C_emp, base.C_emp, 1e-9);
    }
    // analytic path: rotations by the angular step of the global rule
    auto sigma = Barycenter::make({{0.4, 0.6}, {2.9, 0.4}});
    auto a0 = improved_bound_report(test_function_disk(30, sigma), 1, 0.1, cfg);
    auto rot = sigma;
    for (auto& a : rot.atoms) a.theta = canonical_angle(a.theta + 5 * two_pi / 384);
    auto a1 = improved_bound_report(test_function_disk(30, rot), 1, 0.1, cfg);
    EXPECT_NEAR(a1.C_emp, a0.C_emp, 1e-9);
}

TEST(ImprovedBound, ConstrainedBoundedOffCentreDiverges) {
    auto cfg = SingularConfig::canonical_disk(1.0, 1.0);
    auto g = PolarGrid::uniform(128, 128);
    // x y (1 - |x|^2) is even, so the first moment of f~_u vanishes
    double c0 = -INFINITY;
    for (double t : {0.0, 2.5, 5.0, 7.5, 10.0}) {
        auto u = DiskField::sample(g, [t](Point2 x) { return t * x.x * x.y * (1 - x.x * x.x - x.y * x.y); });
        for (auto& b : u.boundary) b = 0;
        auto f = conformal_density(u, cfg).density;
        EXPECT_LT(std::abs(moment_map(angular_pushforward(f), 1)[0]), 1e-12);
        double c = improved_bound_report(u, 1, 0.1, cfg).C_emp;
        if (t == 0) c0 = c;
        EXPECT_LE(c, c0 + 1.0);
    }
    auto single = Barycenter::make({{0.0, 1.0}});
    std::vector<double> C;
    for (double lam : {1e2, 1e3, 1e4}) C.push_back(improved_bound_report(test_function_disk(lam, single), 1, 0.1, cfg).C_emp);
    // C_emp ~ (1 - eps) log lambda
    EXPECT_GT(C[1], C[0] + 1.5);
    EXPECT_GT(C[2], C[1] + 1.5);
}

TEST(NelderMead, QuadraticAndBudget) {
    auto f = [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 10 * (x[1] + 2) * (x[1] + 2); };
    auto r = detail::nelder_mead(f, {0, 0}, 0.5, 2000, 10.0, 1e-14);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1, 1e-5);
    EXPECT_NEAR(r.x[1], -2, 1e-5);
    auto s = detail::nelder_mead(f, {0, 0}, 0.5, 10, 10.0);
    EXPECT_LE(s.evals, 10);
}

TEST(MomentInfimum, SubcriticalFiniteAndPreconditions) {
    FamilySpec spec;
    spec.constrained = false;
    auto r = moment_vanishing_infimum(SingularConfig::canonical_disk(1.0, 2 * pi), 1, spec, 100);
    EXPECT_TRUE(std::isfinite(r.I));
    EXPECT_LE(r.evaluations, 100);
    EXPECT_THROW(moment_vanishing_infimum(SingularConfig::canonical_disk(1.0, 8 * pi), 1, spec, 100), config_error);
}

TEST(MomentInfimum, ConstrainedFamilyHasSmallResidual) {
    FamilySpec spec;
    auto x = detail::family_start(spec);
    ASSERT_EQ(x.size(), 11u);
    auto e = evaluate(detail::family_member(spec, x), SingularConfig::canonical_disk(1.0, 6 * pi), spec.quad, true);
    cplx F{0, 0};
    for (auto& a : e.atoms) F += a.w * std::polar(1.0, std::atan2(a.p.y, a.p.x));
    // two antipodal equal bubbles: the first moment vanishes up to quadrature symmetry
    EXPECT_LT(std::abs(F), 1e-10);
    // Fourier part vanishes on the boundary
    x[8] = 0.7;
    x[10] = -0.3;
    EXPECT_TRUE(vanishes_on_boundary(detail::family_member(spec, x)));
}
