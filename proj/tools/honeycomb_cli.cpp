// Command-line driver: emits CSV/JSON artifacts for the band structure,
// Fermi points, regime error scans, scale tables, tree counts, determinant
// bounds, and the acceptance suite.
//
// Exit codes: 0 success, 1 suite/tolerance failure, 2 invalid configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "honeycomb/verify.hpp"

namespace {

using ojson = nlohmann::ordered_json;
using namespace honeycomb;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double epsilon = 0.1;
    double gamma3_ratio = 0.33;
    double beta = -1.0;  // <= 0: use the default inverse temperature
    int L = 16;
    int M = 8;
    RegimeConstants rc{};
    double tolerance = 1e-10;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    HoppingParams params() const { return {epsilon, gamma3_ratio}; }

    double beta_resolved() const {
        return beta > 0.0 ? beta : default_beta(params(), rc);
    }
};

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ojson j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, val] : j.items()) {
        if (key == "epsilon")
            cfg.epsilon = val.get<double>();
        else if (key == "gamma3-ratio")
            cfg.gamma3_ratio = val.get<double>();
        else if (key == "beta")
            cfg.beta = val.get<double>();
        else if (key == "L")
            cfg.L = val.get<int>();
        else if (key == "M")
            cfg.M = val.get<int>();
        else if (key == "kappa0bar")
            cfg.rc.k0bar = val.get<double>();
        else if (key == "kappa1")
            cfg.rc.k1 = val.get<double>();
        else if (key == "kappa1bar")
            cfg.rc.k1bar = val.get<double>();
        else if (key == "kappa2")
            cfg.rc.k2 = val.get<double>();
        else if (key == "kappa2bar")
            cfg.rc.k2bar = val.get<double>();
        else if (key == "tolerance")
            cfg.tolerance = val.get<double>();
        else if (key == "seed")
            cfg.seed = val.get<std::uint64_t>();
        else if (key == "output-dir")
            cfg.output_dir = val.get<std::string>();
        else
            throw ConfigError("unknown config key: " + key);
    }
}

void validate(const RunConfig& cfg) {
    if (!(cfg.epsilon > 0.0) || !(cfg.params().G() < 2.0))
        throw ConfigError("epsilon/gamma3-ratio outside the gapless range");
    if (cfg.L < 2 || cfg.M < 1) throw ConfigError("need L >= 2 and M >= 1");
    try {
        (void)scale_thresholds(cfg.params(), cfg.rc, cfg.beta_resolved(), cfg.M);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scale table invalid: ") + e.what());
    }
}

std::string real17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_artifact(const RunConfig& cfg, const std::string& name,
                            std::string* path_out) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::string path = (std::filesystem::path(cfg.output_dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write artifact: " + path);
    if (path_out) *path_out = path;
    return out;
}

int cmd_bands(const RunConfig& cfg, const std::string& path_name, int n) {
    Vec2 a{0.0, 0.0}, b;
    if (path_name == "gamma-to-K")
        b = fermi_point_center_of(+1);
    else if (path_name == "gamma-to-Kprime")
        b = fermi_point_center_of(-1);
    else
        throw ConfigError("unknown path: " + path_name);
    if (n < 2) throw ConfigError("need --n >= 2");
    std::string path;
    std::ofstream out = open_artifact(cfg, "bands.csv", &path);
    out << "k_x,k_y,e1,e2,e3,e4\n";
    for (int i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) / (n - 1);
        const Vec2 k = (1.0 - s) * a + s * b;
        const auto e = band_eigenvalues(k, cfg.params());
        out << real17(k.x) << ',' << real17(k.y) << ',' << real17(e[0]) << ','
            << real17(e[1]) << ',' << real17(e[2]) << ',' << real17(e[3]) << '\n';
    }
    std::printf("wrote %s (%d rows)\n", path.c_str(), n);
    return 0;
}

int cmd_fermi(const RunConfig& cfg) {
    const auto closed = fermi_points_closed_form(cfg.params().G());
    const auto found = fermi_points_root_find(cfg.params(), 128, 1e-14);
    ojson list = ojson::array();
    double worst = 0.0;
    for (const auto& fp : closed) {
        double best = 1e300;
        for (const auto& q : found) best = std::min(best, torus_distance(q, fp.k));
        worst = std::max(worst, best);
        list.push_back({{"omega", fp.omega},
                        {"j", fp.j},
                        {"k_x", fp.k.x},
                        {"k_y", fp.k.y},
                        {"residual", best}});
    }
    std::string path;
    std::ofstream out = open_artifact(cfg, "fermi.json", &path);
    out << ojson({{"epsilon", cfg.epsilon}, {"points", list}}).dump(2) << '\n';
    std::printf("wrote %s (8 points, worst residual %.3g)\n", path.c_str(), worst);
    return worst <= cfg.tolerance ? 0 : 1;
}

int cmd_regimes(const RunConfig& cfg, const std::string& regime, double rho_min,
                double rho_max, int n) {
    const double e = cfg.epsilon;
    RegimeLabel lab{RegimeKind::I, +1, 0};
    double lo = 0.0, hi = 0.0;
    if (regime == "I") {
        lab.kind = RegimeKind::I;
        lo = 1.05 * cfg.rc.k1 * e;
        hi = 0.95 * cfg.rc.k0bar;
    } else if (regime == "II") {
        lab.kind = RegimeKind::II;
        lo = 1.5 * cfg.rc.k2 * e * e * e;
        hi = 0.95 * cfg.rc.k1bar * e;
    } else if (regime == "III0" || regime == "III1") {
        lab.kind = RegimeKind::III;
        lab.j = regime == "III1" ? 1 : 0;
        lo = 1e-7;
        hi = 0.95 * cfg.rc.k2bar * e * e * e;
    } else {
        throw ConfigError("unknown regime: " + regime + " (use I, II, III0, III1)");
    }
    if (rho_min > 0.0) lo = rho_min;
    if (rho_max > 0.0) hi = rho_max;
    if (n < 12) throw ConfigError("need --n >= 12");
    if (!(lo < hi)) throw ConfigError("need rho-min < rho-max");
    const auto scan = approximation_error_scan(
        lab, cfg.params(), verify_detail::log_grid(lo, hi, n), cfg.rc);
    std::string path;
    std::ofstream out = open_artifact(cfg, "regimes.csv", &path);
    out << "rho,error\n";
    for (std::size_t i = 0; i < scan.rho.size(); ++i)
        out << real17(scan.rho[i]) << ',' << real17(scan.r[i]) << '\n';
    std::printf("wrote %s (regime %s, slope_low %.4f, slope_high %.4f)\n", path.c_str(),
                regime.c_str(), scan.slope_low, scan.slope_high);
    return 0;
}

int cmd_scales(const RunConfig& cfg) {
    const ScaleTable t =
        scale_thresholds(cfg.params(), cfg.rc, cfg.beta_resolved(), cfg.M);
    ojson fps = ojson::array();
    for (const auto& fp : t.fps)
        fps.push_back(
            {{"omega", fp.omega}, {"j", fp.j}, {"k_x", fp.k.x}, {"k_y", fp.k.y}});
    const ojson j{{"epsilon", cfg.epsilon}, {"beta", t.beta},   {"M", t.M},
                  {"h0bar", t.h0bar},       {"h1", t.h1},       {"h1bar", t.h1bar},
                  {"h2", t.h2},             {"h2bar", t.h2bar}, {"hbeta", t.hbeta},
                  {"scales", t.scales},     {"fermi_points", fps}};
    std::string path;
    std::ofstream out = open_artifact(cfg, "scales.json", &path);
    out << j.dump(2) << '\n';
    std::printf("wrote %s (%zu scales)\n", path.c_str(), t.scales.size());
    return 0;
}

int cmd_trees(const RunConfig& cfg, int nmax, int span, const std::string& mode_name) {
    TreeMode mode;
    if (mode_name == "standard")
        mode = TreeMode::standard;
    else if (mode_name == "contracted")
        mode = TreeMode::contracted;
    else
        throw ConfigError("unknown mode: " + mode_name);
    std::string path;
    std::ofstream out = open_artifact(cfg, "trees.csv", &path);
    out << "n,trees,shapes\n";
    for (int n = 1; n <= nmax; ++n)
        out << n << ',' << enumerate_trees(n, -2, -2 + span, mode).size() << ','
            << branching_tree_count(n) << '\n';
    std::printf("wrote %s (orders 1..%d, span %d, %s mode)\n", path.c_str(), nmax, span,
                mode_name.c_str());
    return 0;
}

int cmd_grassmann(const RunConfig& cfg, int samples) {
    using namespace verify_detail;
    std::mt19937_64 rng(cfg.seed);
    std::string path;
    std::ofstream out = open_artifact(cfg, "grassmann.csv", &path);
    out << "instance,pairs,sets,truncated_re,truncated_im,tree_sum,gram_const,bound,pass\n";
    int failures = 0;
    for (int i = 0; i < samples; ++i) {
        const int n = 4 + static_cast<int>(rng() % 3);
        const GaussianSpec spec = random_spec(rng, n);
        const int nsets = 2 + static_cast<int>(rng() % 2);
        std::vector<int> ids(static_cast<std::size_t>(2 * n));
        for (int k = 0; k < 2 * n; ++k) ids[static_cast<std::size_t>(k)] = k;
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<std::vector<int>> ps;
        std::size_t at = 0;
        for (int s = 0; s < nsets; ++s) {
            ps.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(at),
                            ids.begin() + static_cast<std::ptrdiff_t>(at + 2));
            at += 2;
        }
        const auto r = bbf_check(spec, ps);
        failures += r.pass ? 0 : 1;
        out << i << ',' << n << ',' << nsets << ',' << real17(r.truncated.real()) << ','
            << real17(r.truncated.imag()) << ',' << real17(r.tree_sum) << ','
            << real17(r.gram_const) << ',' << real17(r.bound) << ','
            << (r.pass ? 1 : 0) << '\n';
    }
    std::printf("wrote %s (%d instances, %d bound violations)\n", path.c_str(), samples,
                failures);
    return failures == 0 ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg) {
    const auto results = run_acceptance_checks();
    ojson checks = ojson::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        std::printf("criterion %2d [%s] %-45s (%.2fs)%s%s\n", r.id,
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                    r.detail.empty() ? "" : " -- ", r.detail.c_str());
        checks.push_back(
            {{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    }
    std::string path;
    std::ofstream out = open_artifact(cfg, "verify.json", &path);
    out << ojson({{"all_pass", all}, {"checks", checks}}).dump(2) << '\n';
    std::printf("wrote %s\n", path.c_str());
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;

    // config file first, flags override
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            if (a == "--config" && i + 1 < argc)
                load_config_file(argv[i + 1], cfg);
            else if (a.rfind("--config=", 0) == 0)
                load_config_file(a.substr(9), cfg);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    CLI::App app{"honeycomb bilayer multiscale toolkit"};
    app.require_subcommand(1);

    std::string path_name = "gamma-to-K", regime = "I", mode_name = "standard";
    int nbands = 200, nscan = 12, ntrees = 4, span = 3, samples = 25;
    double rho_min = -1.0, rho_max = -1.0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", "JSON config file (flags override)");
        sub->add_option("--epsilon", cfg.epsilon, "interlayer coupling");
        sub->add_option("--gamma3-ratio", cfg.gamma3_ratio, "gamma3/gamma1 ratio");
        sub->add_option("--beta", cfg.beta, "inverse temperature (<=0: default)");
        sub->add_option("--L", cfg.L, "spatial lattice side");
        sub->add_option("--M", cfg.M, "ultraviolet reference scale");
        sub->add_option("--kappa0bar", cfg.rc.k0bar, "ultraviolet threshold");
        sub->add_option("--kappa1", cfg.rc.k1, "first-regime threshold");
        sub->add_option("--kappa1bar", cfg.rc.k1bar, "first intermediate threshold");
        sub->add_option("--kappa2", cfg.rc.k2, "second-regime threshold");
        sub->add_option("--kappa2bar", cfg.rc.k2bar, "second intermediate threshold");
        sub->add_option("--tolerance", cfg.tolerance, "acceptance tolerance");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--output-dir", cfg.output_dir, "artifact directory");
    };

    CLI::App* bands = app.add_subcommand("bands", "band energies along a momentum path");
    bands->add_option("--path", path_name, "gamma-to-K or gamma-to-Kprime");
    bands->add_option("--n", nbands, "number of samples");
    add_common(bands);

    CLI::App* fermi = app.add_subcommand("fermi", "the eight Fermi points");
    add_common(fermi);

    CLI::App* regimes = app.add_subcommand("regimes", "propagator error scan");
    regimes->add_option("--regime", regime, "I, II, III0 or III1");
    regimes->add_option("--rho-min", rho_min, "smallest scan radius");
    regimes->add_option("--rho-max", rho_max, "largest scan radius");
    regimes->add_option("--n", nscan, "number of radii (>= 12)");
    add_common(regimes);

    CLI::App* scales = app.add_subcommand("scales", "scale thresholds and bands");
    add_common(scales);

    CLI::App* trees = app.add_subcommand("trees", "scale-tree counts");
    trees->add_option("--n", ntrees, "largest endpoint count");
    trees->add_option("--span", span, "scale span");
    trees->add_option("--mode", mode_name, "standard or contracted");
    add_common(trees);

    CLI::App* grassmann =
        app.add_subcommand("grassmann", "determinant-expansion bound samples");
    grassmann->add_option("--samples", samples, "number of random instances");
    add_common(grassmann);

    CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");
    add_common(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        validate(cfg);
        if (bands->parsed()) return cmd_bands(cfg, path_name, nbands);
        if (fermi->parsed()) return cmd_fermi(cfg);
        if (regimes->parsed()) return cmd_regimes(cfg, regime, rho_min, rho_max, nscan);
        if (scales->parsed()) return cmd_scales(cfg);
        if (trees->parsed()) return cmd_trees(cfg, ntrees, span, mode_name);
        if (grassmann->parsed()) return cmd_grassmann(cfg, samples);
        if (verify->parsed()) return cmd_verify(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
