#pragma once

#include <charconv>
#include <sstream>

#include "barycenters.hpp"
#include "concentration.hpp"
#include "solver.hpp"

// Command drivers shared by the command-line tool and the acceptance harness. Every command
// returns its artifacts as strings; the caller is the single writer.
namespace liouville::cli {

struct Artifact {
    std::string name;
    std::string content;
};

struct Output {
    std::vector<Artifact> files;
    std::string text;  // human summary for stdout
    int exit_code = 0;
};

inline constexpr const char* tool_name = "liouville";

// shortest round-trip decimal form
inline std::string num(double x) {
    if (x == 0) x = 0.0;  // drop the sign of zero
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

// accepts plain reals and multiples of pi: "7pi", "0.5pi", "pi", "-pi"
inline double parse_real(const std::string& s) {
    std::string t = s;
    bool with_pi = t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0;
    if (with_pi) t.erase(t.size() - 2);
    if (with_pi && (t.empty() || t == "+" || t == "-")) t += "1";
    double v = 0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) throw config_error("not a number: " + s);
    return with_pi ? v * pi : v;
}

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_real(item));
    if (out.empty()) throw config_error("empty list: " + s);
    return out;
}

// "theta:w,theta:w" with optional pi suffix on the angles
inline Barycenter parse_atoms(const std::string& s) {
    std::vector<CircleAtom> a;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto c = item.find(':');
        if (c == std::string::npos) throw config_error("atom must be theta:weight: " + item);
        a.push_back({parse_real(item.substr(0, c)), parse_real(item.substr(c + 1))});
    }
    if (a.empty()) throw config_error("no atoms given");
    return Barycenter::make(a);
}

inline json envelope(const std::string& command, const json& config, json result) {
    return json{{"tool", tool_name}, {"version", version}, {"command", command}, {"config", config},
                {"result", std::move(result)}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// RFC-4180 rows; the first line is a '#' metadata comment carrying tool, version and config
inline std::string csv(const std::string& command, const json& config, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
    auto field = [](const std::string& f) {
        if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
        std::string q = "\"";
        for (char c : f) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    std::string out = "# " + std::string(tool_name) + " " + version + " " + command + " config=" + config.dump() + "\r\n";
    auto line = [&](const std::vector<std::string>& r) {
        for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + field(r[i]);
        out += "\r\n";
    };
    line(header);
    for (auto& r : rows) line(r);
    return out;
}

// ---- minimal SVG primitives ----

inline std::string svg_polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& xl,
                                const std::string& yl) {
    const double W = 640, H = 400, m = 50;
    double x0 = *std::min_element(x.begin(), x.end()), x1 = *std::max_element(x.begin(), x.end());
    double y0 = *std::min_element(y.begin(), y.end()), y1 = *std::max_element(y.begin(), y.end());
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    std::string pts;
    for (size_t i = 0; i < x.size(); ++i) {
        double px = m + (x[i] - x0) / (x1 - x0) * (W - 2 * m), py = H - m - (y[i] - y0) / (y1 - y0) * (H - 2 * m);
        pts += (i ? " " : "") + num(std::round(px * 100) / 100) + "," + num(std::round(py * 100) / 100);
    }
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
    s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    s += "<polyline fill=\"none\" stroke=\"black\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"320\" y=\"390\" text-anchor=\"middle\">" + xl + " [" + num(x0) + ", " + num(x1) + "]</text>\n";
    s += "<text x=\"10\" y=\"20\">" + yl + " [" + num(y0) + ", " + num(y1) + "]</text>\n</svg>\n";
    return s;
}

inline std::string svg_heatmap(const std::vector<double>& v, size_t n) {
    double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    if (hi == lo) hi = lo + 1;
    const double c = 400.0 / double(n);
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\">\n";
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            int g = int(std::lround(255 * (v[i * n + j] - lo) / (hi - lo)));
            s += "<rect x=\"" + num(double(j) * c) + "\" y=\"" + num(double(n - 1 - i) * c) + "\" width=\"" + num(c) +
                 "\" height=\"" + num(c) + "\" fill=\"rgb(" + std::to_string(g) + "," + std::to_string(g) + "," +
                 std::to_string(255 - g) + ")\"/>\n";
        }
    return s + "</svg>\n";
}

// ---- samplers ----

// angles with every circular gap >= gap, weights >= wmin
inline std::vector<double> separated_angles(Rng& rng, int k, double gap) {
    if (k * gap >= two_pi) throw config_error("gap too large for k atoms");
    std::vector<double> th;
    for (;;) {
        th.clear();
        for (int i = 0; i < k; ++i) th.push_back(rng.uniform(0, two_pi));
        std::sort(th.begin(), th.end());
        bool ok = true;
        for (int i = 0; i < k && k > 1; ++i)
            if ((i + 1 < k ? th[i + 1] : th[0] + two_pi) - th[i] < gap) ok = false;
        if (ok) return th;
    }
}

inline Barycenter random_barycenter(Rng& rng, int k, double gap, double wmin) {
    if (k * wmin >= 1) throw config_error("wmin too large for k atoms");
    auto th = separated_angles(rng, k, gap);
    std::vector<double> e(k);
    double s = 0;
    for (auto& x : e) s += (x = -std::log(1.0 - rng.uniform()));
    std::vector<CircleAtom> a;
    for (int i = 0; i < k; ++i) a.push_back({th[i], wmin + (1.0 - k * wmin) * e[i] / s});
    return Barycenter::make(a);
}

// interior target Phi_k(w) with small |w_i|
inline MomentVector generic_target(Rng& rng, int k) {
    WPoint w(k);
    for (auto& x : w) x = std::polar(rng.uniform(0.05, 0.3), rng.uniform(0, two_pi));
    return phi_k(w);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// cell masses of narrow Gaussians centred at c, product of erf differences in (r, r0 theta)
inline DiskDensity gaussian_bumps(const PolarGrid& g, const std::vector<Point2>& centres, double w) {
    std::vector<double> m(g.size(), 0.0);
    for (Point2 c : centres) {
        double r0 = norm(c), t0 = std::atan2(c.y, c.x);
        for (size_t i = 0; i < g.n_r(); ++i) {
            double pr = normal_cdf((g.edges[i + 1] - r0) / w) - normal_cdf((g.edges[i] - r0) / w);
            if (pr < 1e-300) continue;
            for (size_t j = 0; j < g.n_theta; ++j) {
                double d = angle_diff(g.theta(j), t0), h = 0.5 * g.dtheta();
                m[g.idx(i, j)] += pr * (normal_cdf(r0 * (d + h) / w) - normal_cdf(r0 * (d - h) / w));
            }
        }
    }
    auto f = DiskDensity::from_cell_masses(g, m);
    f.normalize();
    return f;
}

// f proportional to 1/|x|^2 on A(a, b), exact cell masses
inline DiskDensity inverse_square(const PolarGrid& g, double a, double b) {
    if (!(a > 0 && a < b && b <= 1)) throw config_error("need 0 < a < b <= 1");
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

// k+1 bumps at radius 0.5, angles 2 pi i/(k+1)
inline std::vector<Point2> ring_centres(int n) {
    std::vector<Point2> c;
    for (int i = 0; i < n; ++i) c.push_back({0.5 * std::cos(two_pi * i / n), 0.5 * std::sin(two_pi * i / n)});
    return c;
}

// ---- solve ----

struct SolveConfig {
    double alpha = 0, rho_start = 0, rho_end = 0;
    int steps = 100;
    int M = 4096;
    double t_min = -30;
    double u_blow = 25;
    bool svg = false;
    bool save_last = false;

    json to_json() const {
        return json{{"alpha", alpha}, {"rho_start", rho_start}, {"rho_end", rho_end}, {"steps", steps},
                    {"M", M},         {"t_min", t_min},         {"u_blow", u_blow},   {"svg", svg},
                    {"save_last", save_last}};
    }
};

inline Output run_solve(const SolveConfig& c) {
    if (!(c.alpha >= 0)) throw config_error("alpha must be nonnegative");
    if (c.M < 64) throw config_error("M must be at least 64");
    ContinuationOptions opt;
    opt.M = c.M;
    opt.t_min = c.t_min;
    opt.u_blow = c.u_blow;
    auto br = continuation(c.rho_start, c.rho_end, c.alpha, c.steps, opt);
    const json cfg = c.to_json();

    std::vector<std::vector<std::string>> rows, prow;
    json pts = json::array(), poho = json::array();
    std::vector<double> xs, ys;
    for (auto& p : br.points) {
        auto ph = pohozaev_residual_disk(p.sol);
        double res = radial_residual(p.sol);
        rows.push_back({num(p.rho), num(p.sol.max_u()), num(p.sol.mass), num(ph.margin), num(res)});
        prow.push_back({num(p.rho), num(ph.lhs), num(ph.rhs), num(ph.residual), num(ph.margin)});
        pts.push_back(json{{"rho", p.rho}, {"max_u", p.sol.max_u()}, {"mass", p.sol.mass},
                           {"pohozaev_margin", ph.margin}, {"residual", res}});
        poho.push_back(json{{"rho", p.rho}, {"lhs", ph.lhs}, {"rhs", ph.rhs}, {"residual", ph.residual},
                            {"margin", ph.margin}});
        xs.push_back(p.rho);
        ys.push_back(p.sol.max_u());
    }
    json res{{"termination", termination_name(br.reason)},
             {"rho_star", br.rho_star},
             {"bracket", {br.bracket_lo, br.bracket_hi}},
             {"threshold", br.threshold},
             {"nearest_lambda", br.nearest_lambda},
             {"rel_distance", br.rel_distance},
             {"points", pts},
             {"pohozaev", poho}};
    Output out;
    out.files.push_back({"branch.json", dump(envelope("solve", cfg, res))});
    out.files.push_back({"branch.csv", csv("solve", cfg, {"rho", "max_u", "mass", "pohozaev_margin", "residual"}, rows)});
    out.files.push_back({"pohozaev.csv", csv("solve", cfg, {"rho", "lhs", "rhs", "residual", "margin"}, prow)});
    if (c.svg && !xs.empty()) out.files.push_back({"branch.svg", svg_polyline(xs, ys, "rho", "max u")});
    if (c.save_last && !br.points.empty()) {
        std::ostringstream os;
        auto& s = br.points.back().sol;
        write_binary_radial(os, s.t, s.u);
        out.files.push_back({"last_solution.bin", os.str()});
    }
    std::ostringstream t;
    t << "termination: " << termination_name(br.reason) << "\n";
    t << "points: " << br.points.size() << "\n";
    if (br.reason == Termination::blow_up)
        t << "rho*: " << num(br.rho_star) << " nearest Lambda: " << num(br.nearest_lambda)
          << " relative distance: " << num(br.rel_distance) << "\n";
    out.text = t.str();
    if (br.reason == Termination::newton_failure) out.exit_code = 2;
    return out;
}

// ---- moments ----

struct RoundtripConfig {
    int k = 1, trials = 100;
    std::uint64_t seed = 1;
    double gap = 0.1, wmin = 0.05, tol = 1e-8;
    json to_json() const {
        return json{{"k", k}, {"trials", trials}, {"seed", seed}, {"gap", gap}, {"wmin", wmin}, {"tol", tol}};
    }
};

struct RoundtripResult {
    double max_error = 0;
    int failures = 0;  // inversion threw
};

inline RoundtripResult roundtrip_errors(const RoundtripConfig& c, std::vector<std::vector<std::string>>* rows = nullptr) {
    if (c.k < 1 || c.trials < 1) throw config_error("need k >= 1 and trials >= 1");
    Rng rng(c.seed);
    RoundtripResult r;
    for (int t = 0; t < c.trials; ++t) {
        auto b = random_barycenter(rng, c.k, c.gap, c.wmin);
        double e = INFINITY;
        try {
            e = kr_distance(invert_moments(moment_map(b, c.k)).measure(), b.measure());
        } catch (const compute_error&) {
            ++r.failures;
        }
        r.max_error = std::max(r.max_error, e);
        if (rows) rows->push_back({std::to_string(t), num(e)});
    }
    return r;
}

inline Output run_roundtrip(const RoundtripConfig& c) {
    std::vector<std::vector<std::string>> rows;
    auto r = roundtrip_errors(c, &rows);
    json cfg = c.to_json();
    json res{{"max_kr_error", r.max_error}, {"failures", r.failures}, {"within_tol", r.max_error < c.tol}};
    Output out;
    out.files.push_back({"roundtrip.json", dump(envelope("moments roundtrip", cfg, res))});
    out.files.push_back({"roundtrip.csv", csv("moments roundtrip", cfg, {"trial", "kr_error"}, rows)});
    out.text = "max KR error: " + num(r.max_error) + "\n";
    return out;
}

struct DegreeConfig {
    int k = 2, starts = 500, targets = 1;
    std::uint64_t seed = 1;
    json to_json() const { return json{{"k", k}, {"starts", starts}, {"targets", targets}, {"seed", seed}}; }
};

inline Output run_degree(const DegreeConfig& c) {
    if (c.k < 1 || c.starts < 1 || c.targets < 1) throw config_error("need k, starts, targets >= 1");
    Rng rng(c.seed);
    json arr = json::array();
    std::ostringstream t;
    for (int i = 0; i < c.targets; ++i) {
        auto b = generic_target(rng, c.k);
        auto pc = count_preimages(b, c.starts, c.seed + std::uint64_t(i));
        json sols = json::array();
        for (auto& w : pc.solutions) {
            json s = json::array();
            for (auto& z : w) s.push_back({z.real(), z.imag()});
            sols.push_back(s);
        }
        json tb = json::array();
        for (auto& z : b) tb.push_back({z.real(), z.imag()});
        arr.push_back(json{{"target", tb}, {"count", pc.count}, {"lower_bound", pc.lower_bound}, {"solutions", sols}});
        t << "target " << i << ": " << pc.count << " preimages (k! = " << factorial(c.k) << ")\n";
    }
    Output out;
    out.files.push_back({"degree.json", dump(envelope("moments degree", c.to_json(), json{{"targets", arr}}))});
    out.text = t.str();
    return out;
}

struct ProjectConfig {
    std::string atoms = "0:1";
    int k = 1;
    double noise = 0, eps_proj = 0.05;
    std::uint64_t seed = 1;
    json to_json() const {
        return json{{"atoms", atoms}, {"k", k}, {"noise", noise}, {"eps_proj", eps_proj}, {"seed", seed}};
    }
};

inline Output run_project(const ProjectConfig& c) {
    if (c.k < 1) throw config_error("k must be positive");
    auto sigma = parse_atoms(c.atoms);
    auto b = moment_map(sigma, c.k);
    Rng rng(c.seed);
    for (auto& z : b) z += cplx(rng.uniform(-c.noise, c.noise), rng.uniform(-c.noise, c.noise));
    auto p = project_Xi(b, c.eps_proj);
    json at = json::array();
    for (auto& a : p.barycenter.atoms) at.push_back(json{{"theta", a.theta}, {"w", a.w}});
    json res{{"scale", p.scale}, {"atoms", at}, {"kr_to_input", kr_distance(p.barycenter.measure(), sigma.measure())}};
    Output out;
    out.files.push_back({"project.json", dump(envelope("moments project", c.to_json(), res))});
    out.text = "projected onto " + std::to_string(p.barycenter.size()) + " atoms, scale " + num(p.scale) + "\n";
    return out;
}

struct DetScanConfig {
    int k = 2, n = 64;
    bool svg = false;
    json to_json() const { return json{{"k", k}, {"n", n}, {"svg", svg}}; }
};

// det A_2k over (theta_1, theta_2) in [0, 2 pi)^2; for k > 2 the other angles sit at 0.37 + 2 pi i/k
inline Output run_det_scan(const DetScanConfig& c) {
    if (c.k < 2) throw config_error("det-scan needs k >= 2");
    if (c.n < 2) throw config_error("n must be at least 2");
    const size_t n = size_t(c.n);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> v(n * n);
    double diag = 0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            std::vector<double> th(size_t(c.k));
            for (int q = 2; q < c.k; ++q) th[size_t(q)] = 0.37 + two_pi * q / c.k;
            th[0] = two_pi * double(i) / double(n);
            th[1] = two_pi * double(j) / double(n);
            double d = det_A2k(th);
            v[i * n + j] = d;
            if (i == j) diag = std::max(diag, std::abs(d));
            rows.push_back({num(th[0]), num(th[1]), num(d)});
        }
    json cfg = c.to_json();
    Output out;
    out.files.push_back({"det_scan.csv", csv("moments det-scan", cfg, {"theta1", "theta2", "det"}, rows)});
    out.files.push_back({"det_scan.json", dump(envelope("moments det-scan", cfg, json{{"max_abs_det_on_diagonal", diag}}))});
    if (c.svg) out.files.push_back({"det_scan.svg", svg_heatmap(v, n)});
    out.text = "max |det| on the diagonal: " + num(diag) + "\n";
    return out;
}

// ---- analyze ----

struct SynthConfig {
    std::string kind = "bumps";  // bumps | inverse-square
    int k = 1;
    double width = 1e-3;
    int n_r = 128, n_theta = 256;
    double a = 1e-6, b = 1;
    json to_json() const {
        return json{{"kind", kind}, {"k", k}, {"width", width}, {"n_r", n_r}, {"n_theta", n_theta}, {"a", a}, {"b", b}};
    }
};

inline DiskDensity synth_density(const SynthConfig& c) {
    if (c.n_r < 2 || c.n_theta < 4) throw config_error("grid too small");
    if (c.kind == "bumps") {
        if (c.k < 0) throw config_error("k must be nonnegative");
        return gaussian_bumps(PolarGrid::uniform(size_t(c.n_r), size_t(c.n_theta)), ring_centres(c.k + 1), c.width);
    }
    if (c.kind == "inverse-square") {
        // eight cells per octave down to a/16
        auto g = PolarGrid::log_radial(std::exp2(std::floor(std::log2(c.a)) - 4), c.b, 8, size_t(c.n_theta));
        return inverse_square(g, c.a, c.b);
    }
    throw config_error("unknown density kind: " + c.kind);
}

inline Output run_synth(const SynthConfig& c) {
    auto f = synth_density(c);
    json j = to_json(f);
    j["tool"] = tool_name;
    j["version"] = version;
    j["config"] = c.to_json();
    Output out;
    out.files.push_back({"density.json", dump(j)});
    out.text = "wrote density on " + std::to_string(f.grid.size()) + " cells\n";
    return out;
}

struct AlternativeConfig {
    std::string input;
    AlternativeParams params;
    json to_json() const { return json{{"input", input}, {"params", liouville::to_json(params)}}; }
};

inline Output run_alternative(const AlternativeConfig& c, const DiskDensity& f) {
    auto rep = detect_alternative(f, c.params);  // throws verify_error if the certificate fails its re-check
    Output out;
    out.files.push_back({"alternative.json", dump(envelope("analyze alternative", c.to_json(), to_json(rep)))});
    out.text = std::string("verdict: ") + verdict_name(rep.verdict) + "\n";
    return out;
}

struct TestfnConfig {
    int k = 1;
    double rho = 0, alpha = 2.5;
    std::string lambdas = "100,1000,10000";
    std::string atoms;  // default: k equal atoms at 0.3 + 2 pi i/k
    std::string variant = "normalized";
    json to_json() const {
        return json{{"k", k}, {"rho", rho}, {"alpha", alpha}, {"lambdas", lambdas}, {"atoms", atoms}, {"variant", variant}};
    }
};

inline Barycenter default_sigma(int k) {
    std::vector<CircleAtom> a;
    for (int i = 0; i < k; ++i) a.push_back({0.3 + two_pi * i / k, 1.0 / k});
    return Barycenter::make(a);
}

inline Output run_testfn(const TestfnConfig& c) {
    if (c.k < 1) throw config_error("k must be positive");
    auto sigma = c.atoms.empty() ? default_sigma(c.k) : parse_atoms(c.atoms);
    if (int(sigma.size()) > c.k) throw config_error("more atoms than k");
    TestVariant v;
    if (c.variant == "normalized")
        v = TestVariant::normalized;
    else if (c.variant == "printed")
        v = TestVariant::printed;
    else
        throw config_error("variant must be normalized or printed");
    auto cfg = SingularConfig::canonical_disk(c.alpha, c.rho);
    std::vector<std::vector<std::string>> rows;
    json arr = json::array();
    std::ostringstream t;
    t << "lambda,I,d_KR\n";
    for (double lam : parse_list(c.lambdas)) {
        auto r = test_function_report(lam, sigma, cfg, v);
        rows.push_back({num(lam), num(r.I), num(r.kr)});
        arr.push_back(json{{"lambda", lam}, {"I", r.I}, {"energy", r.energy}, {"log_mass", r.log_mass}, {"kr", r.kr}});
        t << num(lam) << "," << num(r.I) << "," << num(r.kr) << "\n";
    }
    json cfgj = c.to_json();
    Output out;
    out.files.push_back({"testfn.json", dump(envelope("analyze testfn", cfgj, json{{"rows", arr}}))});
    out.files.push_back({"testfn.csv", csv("analyze testfn", cfgj, {"lambda", "I", "kr"}, rows)});
    out.text = t.str();
    return out;
}

struct SphereNecConfig {
    double rho = 0, a1 = 0, a2 = 0;
    json to_json() const { return json{{"rho", rho}, {"a1", a1}, {"a2", a2}}; }
};

inline Output run_sphere_nec(const SphereNecConfig& c) {
    bool ok = necessary_condition_sphere(c.rho, c.a1, c.a2);
    json res{{"necessary_condition", ok},
             {"lower", 4 * pi * (1 + c.a1)},
             {"upper", 4 * pi * (1 + c.a2)}};
    Output out;
    out.files.push_back({"sphere_nec.json", dump(envelope("analyze sphere-nec", c.to_json(), res))});
    out.text = std::string("necessary condition: ") + (ok ? "PASS" : "FAIL") + "\n";
    return out;
}

struct ImprovedConfig {
    int k = 1;
    double eps = 0.1, alpha = 1, rho = 1, lambda = 10;
    std::string atoms;
    json to_json() const {
        return json{{"k", k}, {"eps", eps}, {"alpha", alpha}, {"rho", rho}, {"lambda", lambda}, {"atoms", atoms}};
    }
};

// improved Moser-Trudinger report on the test function built from the given barycenter
inline Output run_improved(const ImprovedConfig& c) {
    auto sigma = c.atoms.empty() ? default_sigma(c.k) : parse_atoms(c.atoms);
    auto cfg = SingularConfig::canonical_disk(c.alpha, c.rho);
    auto r = improved_bound_report(test_function_disk(c.lambda, sigma), c.k, c.eps, cfg);
    Output out;
    out.files.push_back({"improved.json", dump(envelope("analyze improved", c.to_json(), to_json(r)))});
    out.text = "C_emp: " + num(r.C_emp) + "\n";
    return out;
}

struct InfimumConfig {
    double rho = 6 * pi, alpha = 1;
    int k = 1, budget = 1600;
    bool unconstrained = false;
    json to_json() const {
        return json{{"rho", rho}, {"alpha", alpha}, {"k", k}, {"budget", budget}, {"unconstrained", unconstrained}};
    }
};

inline Output run_infimum(const InfimumConfig& c) {
    FamilySpec spec;
    spec.constrained = !c.unconstrained;
    auto r = moment_vanishing_infimum(SingularConfig::canonical_disk(c.alpha, c.rho), c.k, spec, c.budget);
    Output out;
    out.files.push_back({"infimum.json", dump(envelope("analyze infimum", c.to_json(), to_json(r)))});
    out.text = "penalized infimum: " + num(r.penalized) + " (I = " + num(r.I) + ", residual " + num(r.residual) + ")\n";
    return out;
}

}  // namespace liouville::cli
