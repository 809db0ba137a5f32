#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <liouville/cli.hpp>

using namespace liouville;
using namespace liouville::cli;

namespace {

// JSON config: nested objects map to subcommands, e.g. {"analyze": {"testfn": {"k": 2}}}
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
        json j;
        try {
            j = json::parse(is);
        } catch (const json::exception& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        walk(j, {}, items);
        return items;
    }

  private:
    static std::string scalar(const json& v) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_float()) return num(v.get<double>());
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("unsupported config value: " + v.dump());
    }

    static void walk(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
        for (auto& [key, v] : j.items()) {
            if (v.is_object()) {
                auto p = parents;
                p.push_back(key);
                walk(v, p, items);
                continue;
            }
            CLI::ConfigItem it;
            it.parents = parents;
            it.name = key;
            if (v.is_array())
                for (auto& x : v) it.inputs.push_back(scalar(x));
            else
                it.inputs.push_back(scalar(v));
            items.push_back(it);
        }
    }
};

// real-valued option accepting the "pi" suffix
CLI::Option* real_opt(CLI::App* app, const std::string& name, double& target, const std::string& desc) {
    return app
        ->add_option_function<std::string>(
            name, [&target](const std::string& s) { target = parse_real(s); }, desc)
        ->check(CLI::Validator(
            [](std::string& s) {
                try {
                    parse_real(s);
                    return std::string();
                } catch (const std::exception& e) {
                    return std::string(e.what());
                }
            },
            "REAL|Npi"));
}

int write_output(const Output& o, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (auto& f : o.files) {
        std::ofstream os(std::filesystem::path(dir) / f.name, std::ios::binary);
        os << f.content;
        if (!os) {
            std::cerr << "error: cannot write " << f.name << "\n";
            return 1;
        }
    }
    std::cout << o.text;
    return o.exit_code;
}

DiskDensity load_density(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot read " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw config_error(std::string("input is not valid JSON: ") + e.what());
    }
    try {
        return disk_density_from_json(j);
    } catch (const json::exception& e) {
        throw config_error(std::string("bad density: ") + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular Liouville equations: moment geometry, functionals, radial solvers"};
    app.set_version_flag("--version", version);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON configuration; command-line flags take precedence");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();
    app.failure_message(CLI::FailureMessage::help);
    app.option_defaults()->always_capture_default();
    std::string out_dir = ".";
    app.add_option("--out", out_dir, "output directory");

    std::function<Output()> action;

    SolveConfig sc;
    auto* solve = app.add_subcommand("solve", "radial continuation on the disk");
    real_opt(solve, "--alpha", sc.alpha, "singular weight at the origin")->required();
    real_opt(solve, "--rho-start", sc.rho_start, "first rho")->required();
    real_opt(solve, "--rho-end", sc.rho_end, "last rho")->required();
    solve->add_option("--steps", sc.steps, "continuation steps")->check(CLI::PositiveNumber);
    solve->add_option("--M", sc.M, "cylinder grid intervals")->check(CLI::Range(64, 1 << 22));
    real_opt(solve, "--t-min", sc.t_min, "left end of the cylinder");
    real_opt(solve, "--u-blow", sc.u_blow, "blow-up level of max u");
    solve->add_flag("--svg", sc.svg, "write a branch diagram");
    solve->add_flag("--save-last", sc.save_last, "write the last solution in the binary field format");
    solve->callback([&] { action = [&] { return run_solve(sc); }; });

    auto* moments = app.add_subcommand("moments", "moment map checks");
    moments->require_subcommand(1);
    moments->fallthrough();
    RoundtripConfig rc;
    auto* rt = moments->add_subcommand("roundtrip", "invert the moment map on random barycenters");
    rt->add_option("--k", rc.k)->required()->check(CLI::Range(1, 16));
    rt->add_option("--trials", rc.trials)->check(CLI::PositiveNumber);
    rt->add_option("--seed", rc.seed);
    rt->add_option("--gap", rc.gap)->check(CLI::NonNegativeNumber);
    rt->add_option("--wmin", rc.wmin)->check(CLI::NonNegativeNumber);
    rt->add_option("--tol", rc.tol)->check(CLI::PositiveNumber);
    rt->callback([&] { action = [&] { return run_roundtrip(rc); }; });

    DegreeConfig dc;
    auto* deg = moments->add_subcommand("degree", "count preimages of generic targets");
    deg->add_option("--k", dc.k)->required()->check(CLI::Range(1, 8));
    deg->add_option("--starts", dc.starts)->check(CLI::PositiveNumber);
    deg->add_option("--targets", dc.targets)->check(CLI::PositiveNumber);
    deg->add_option("--seed", dc.seed);
    deg->callback([&] { action = [&] { return run_degree(dc); }; });

    ProjectConfig pc;
    auto* proj = moments->add_subcommand("project", "project perturbed moments onto the barycenter set");
    proj->add_option("--atoms", pc.atoms, "theta:w,theta:w")->required();
    proj->add_option("--k", pc.k)->required()->check(CLI::Range(1, 16));
    proj->add_option("--noise", pc.noise)->check(CLI::NonNegativeNumber);
    proj->add_option("--eps-proj", pc.eps_proj)->check(CLI::PositiveNumber);
    proj->add_option("--seed", pc.seed);
    proj->callback([&] { action = [&] { return run_project(pc); }; });

    DetScanConfig ds;
    auto* det = moments->add_subcommand("det-scan", "det A_2k over an angle grid");
    det->add_option("--k", ds.k)->required()->check(CLI::Range(2, 8));
    det->add_option("--n", ds.n)->check(CLI::Range(2, 1024));
    det->add_flag("--svg", ds.svg);
    det->callback([&] { action = [&] { return run_det_scan(ds); }; });

    auto* analyze = app.add_subcommand("analyze", "functionals and the concentration alternative");
    analyze->require_subcommand(1);
    analyze->fallthrough();
    AlternativeConfig ac;
    auto* alt = analyze->add_subcommand("alternative", "concentration / separation / vanishing certificate");
    alt->add_option("--input", ac.input, "density JSON")->required();
    alt->add_option("--k", ac.params.k)->check(CLI::PositiveNumber);
    alt->add_option("--delta", ac.params.delta);
    alt->add_option("--tau", ac.params.tau);
    alt->add_option("--eps", ac.params.eps);
    alt->add_option("--C1", ac.params.C1);
    alt->add_option("--sigma0", ac.params.sigma0, "0 selects the default");
    alt->add_option("--N", ac.params.N, "0 selects 4(k+1)");
    alt->callback([&] { action = [&] { return run_alternative(ac, load_density(ac.input)); }; });

    SynthConfig syc;
    auto* syn = analyze->add_subcommand("synth", "write a synthetic density");
    syn->add_option("--kind", syc.kind)->check(CLI::IsMember({"bumps", "inverse-square"}));
    syn->add_option("--k", syc.k, "bumps: k+1 bumps")->check(CLI::NonNegativeNumber);
    syn->add_option("--width", syc.width)->check(CLI::PositiveNumber);
    syn->add_option("--n-r", syc.n_r)->check(CLI::PositiveNumber);
    syn->add_option("--n-theta", syc.n_theta)->check(CLI::PositiveNumber);
    syn->add_option("--a", syc.a)->check(CLI::PositiveNumber);
    syn->add_option("--b", syc.b)->check(CLI::PositiveNumber);
    syn->callback([&] { action = [&] { return run_synth(syc); }; });

    TestfnConfig tc;
    auto* tf = analyze->add_subcommand("testfn", "functional and flat distance along the test functions");
    tf->add_option("--k", tc.k)->required()->check(CLI::PositiveNumber);
    real_opt(tf, "--rho", tc.rho, "rho")->required();
    real_opt(tf, "--alpha", tc.alpha, "singular weight");
    tf->add_option("--lambdas", tc.lambdas);
    tf->add_option("--atoms", tc.atoms, "theta:w,theta:w");
    tf->add_option("--variant", tc.variant)->check(CLI::IsMember({"normalized", "printed"}));
    tf->callback([&] { action = [&] { return run_testfn(tc); }; });

    SphereNecConfig snc;
    auto* sn = analyze->add_subcommand("sphere-nec", "necessary condition on the sphere with two poles");
    real_opt(sn, "--rho", snc.rho, "rho")->required();
    real_opt(sn, "--a1", snc.a1, "weight at the south pole")->required();
    real_opt(sn, "--a2", snc.a2, "weight at the north pole")->required();
    sn->callback([&] { action = [&] { return run_sphere_nec(snc); }; });

    ImprovedConfig ic;
    auto* imp = analyze->add_subcommand("improved", "improved inequality report on a test function");
    imp->add_option("--k", ic.k)->check(CLI::PositiveNumber);
    real_opt(imp, "--eps", ic.eps, "epsilon");
    real_opt(imp, "--alpha", ic.alpha, "singular weight");
    real_opt(imp, "--rho", ic.rho, "rho");
    real_opt(imp, "--lambda", ic.lambda, "concentration scale");
    imp->add_option("--atoms", ic.atoms);
    imp->callback([&] { action = [&] { return run_improved(ic); }; });

    InfimumConfig inc;
    auto* inf = analyze->add_subcommand("infimum", "penalized infimum over trial families");
    real_opt(inf, "--rho", inc.rho, "rho");
    real_opt(inf, "--alpha", inc.alpha, "singular weight");
    inf->add_option("--k", inc.k)->check(CLI::PositiveNumber);
    inf->add_option("--budget", inc.budget)->check(CLI::PositiveNumber);
    inf->add_flag("--unconstrained", inc.unconstrained, "single bubble without the moment penalty");
    inf->callback([&] { action = [&] { return run_infimum(inc); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        return write_output(action(), out_dir);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const verify_error& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 3;
    } catch (const compute_error& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return 2;
    }
}
