#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "currents/suites.hpp"

using namespace currents;
using json = nlohmann::json;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

Vec parse_vec(const std::string& s, int d) {
    const auto parts = split(s, ',');
    if (static_cast<int>(parts.size()) != d) throw ConfigError("expected " + std::to_string(d) + " components in '" + s + "'");
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = parse_double(parts[i]);
    return v;
}

json row_major(const group::Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json vec_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

// Writes to a sibling temporary and renames, so a failed run leaves no partial file.
void write_atomically(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    const std::string tmp = path + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        f << text;
        if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

json report_json(const std::string& name, const suites::RunConfig& cfg, const std::vector<suites::CheckReport>& rs, const char* id_key) {
    json j;
    j["suite"] = name;
    j["seed"] = cfg.seed;
    j["n"] = cfg.n == 0 ? json(nullptr) : json(cfg.n);
    j["partition"] = cfg.partition ? json(cfg.partition->masses) : json(nullptr);
    json checks = json::array(), timing = json::object();
    for (const auto& r : rs) {
        json c;
        c[id_key] = r.check_id;
        c["anchor"] = r.anchor;
        c["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
        c["tolerance"] = r.tolerance;
        c["pass"] = r.pass;
        if (r.value) c["value"] = *r.value;
        if (!r.error.empty()) c["error"] = r.error;
        checks.push_back(c);
        timing[r.check_id] = r.runtime_ms;
    }
    j["checks"] = checks;
    j["pass"] = suites::all_pass(rs);
    // wall-clock data stays outside "checks" so reports compare byte-for-byte there
    j["runtime_ms"] = timing;
    return j;
}

struct Common {
    int n = 2;
    std::string partition;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    std::string config;
};

std::uint64_t default_seed() {
    if (const char* s = std::getenv("CURRENTS_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError("CURRENTS_SEED is not an unsigned integer");
        }
    }
    return suites::RunConfig{}.seed;
}

void add_common(CLI::App* app, Common& c, bool with_format = true) {
    app->add_option("--n", c.n, "dimension n of O(n,1), n >= 2");
    app->add_option("--partition", c.partition, "comma-separated cell masses, e.g. 0.5,0.5");
    app->add_option("--seed", c.seed, "base seed (default: $CURRENTS_SEED or built-in)");
    app->add_option("--out", c.out, "output file (default: stdout)");
    if (with_format) app->add_option("--format", c.format, "output format");
}

// flags > config file > defaults
suites::RunConfig run_config(CLI::App* app, const Common& c) {
    suites::RunConfig cfg;
    cfg.seed = default_seed();
    if (!c.config.empty()) {
        std::ifstream f(c.config);
        if (!f) throw ConfigError("cannot read config file '" + c.config + "'");
        json j;
        try {
            j = json::parse(f);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad config file: ") + e.what());
        }
        try {
            if (j.contains("n")) cfg.n = j.at("n").get<int>();
            if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("partition")) cfg.partition = Partition(j.at("partition").get<std::vector<double>>());
            if (j.contains("tolerances")) cfg.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
            if (j.contains("out")) cfg.output_path = j.at("out").get<std::string>();
            if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad config file: ") + e.what());
        }
    }
    if (app->count("--n")) cfg.n = c.n;
    if (app->count("--seed")) cfg.seed = c.seed;
    if (app->count("--partition")) cfg.partition = Partition::parse(c.partition);
    if (app->count("--out")) cfg.output_path = c.out;
    if (app->count("--format")) cfg.format = c.format;
    if (cfg.partition)
        for (double m : cfg.partition->masses)
            if (!(m > 0.0)) throw ConfigError("masses must be positive");
    suites::validate(cfg);
    return cfg;
}

std::uint64_t seed_of(CLI::App* app, const Common& c) { return app->count("--seed") ? c.seed : default_seed(); }

Dimensions dims_of(int n) {
    if (n < 2) throw ConfigError("n must be at least 2");
    return Dimensions(n);
}

// "z:1.0,0.5|s|d:2.0"; the leftmost letter is the leftmost factor
group::GroupWord parse_word(const std::string& text, const Dimensions& dims) {
    group::GroupWord w;
    const int d = dims.d();
    for (const auto& tok : split(text, '|')) {
        if (tok == "s") {
            w.push_back(group::SLetter{});
            continue;
        }
        const auto colon = tok.find(':');
        if (colon == std::string::npos || colon != 1) throw ConfigError("bad letter '" + tok + "'");
        const std::string arg = tok.substr(2);
        if (tok[0] == 'z') {
            w.push_back(group::TriangularElement{1.0, group::Mat::Identity(d, d), parse_vec(arg, d)});
        } else if (tok[0] == 'd') {
            const double eps = parse_double(arg);
            if (eps == 0.0) throw ConfigError("d needs a nonzero scale");
            w.push_back(group::TriangularElement{eps, group::Mat::Identity(d, d), Vec::Zero(d)});
        } else {
            throw ConfigError("bad letter '" + tok + "'");
        }
    }
    if (w.empty()) throw ConfigError("empty word");
    return w;
}

// "x1,x2;y1,y2" -> one vector per cell
MarginalVector parse_cells(const std::string& text, int d) {
    MarginalVector xi;
    for (const auto& tok : split(text, ';')) xi.push_back(parse_vec(tok, d));
    return xi;
}

// "0.1:0.3,0.2;0.5:-1.0,0.4" -> atoms at x with vector c
PointConfiguration parse_atoms(const std::string& text, int d) {
    PointConfiguration c;
    for (const auto& tok : split(text, ';')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ConfigError("bad atom '" + tok + "'");
        c.atoms.push_back({parse_double(tok.substr(0, colon)), parse_vec(tok.substr(colon + 1), d)});
    }
    return c;
}

int run_check(const suites::RunConfig& cfg, const std::string& name, const std::vector<suites::CheckSpec>& specs, const char* id_key) {
    const auto rs = suites::run_checks(specs, cfg);
    write_atomically(cfg.output_path, report_json(name, cfg, rs, id_key).dump(2) + "\n");
    for (const auto& r : rs)
        std::fprintf(stderr, "%-52s %s  residual=%.3e tol=%.1e  %lld ms\n", r.check_id.c_str(), r.pass ? "PASS" : "FAIL", r.residual,
                     r.tolerance, static_cast<long long>(r.runtime_ms));
    return suites::all_pass(rs) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Basic representation of the current group O(n,1)^X: sampling, densities, operators and identity checks"};
    app.require_subcommand(1);

    // specfun eval
    auto* specfun = app.add_subcommand("specfun", "special functions");
    auto* sf_eval = specfun->add_subcommand("eval", "print one value");
    specfun->require_subcommand(1);
    std::string sf_fn;
    double sf_rho = 0.5, sf_x = 1.0, sf_lambda = 1.0;
    int sf_n = 2;
    sf_eval->add_option("--fn", sf_fn, "I: I_rho(2x), K: K_rho(2x), V: V_rho(x), g: Levy density at |xi| = x, psi: (1+x^2/4)^(-lambda/2)")
        ->required()
        ->check(CLI::IsMember({"I", "K", "V", "g", "psi"}));
    sf_eval->add_option("--rho", sf_rho);
    sf_eval->add_option("--x", sf_x);
    sf_eval->add_option("--n", sf_n);
    sf_eval->add_option("--lambda", sf_lambda);

    // check <suite>
    Common ck;
    std::string ck_suite;
    auto* check = app.add_subcommand("check", "run an identity-check suite");
    check->add_option("suite", ck_suite, "specfun|fourier|levy-khinchin|measures|coherence|invariance|group|reps|spherical|all")->required();
    add_common(check, ck);
    check->add_option("--config", ck.config, "JSON config file (n, seed, partition, tolerances, out)");

    // sample marginal|process
    Common sm;
    std::string sm_kind;
    std::size_t sm_count = 10;
    double sm_mass = 1.0, sm_eps = 1e-6;
    auto* sample = app.add_subcommand("sample", "draw marginal vectors or truncated process configurations (JSON lines)");
    sample->add_option("kind", sm_kind, "marginal|process")->required()->check(CLI::IsMember({"marginal", "process"}));
    add_common(sample, sm, false);
    sample->add_option("--mass", sm_mass, "total mass m(X) for process draws");
    sample->add_option("--eps", sm_eps, "jump cutoff for process draws");
    sample->add_option("--count", sm_count, "number of draws");

    // measure density
    Common md;
    std::string md_which, md_xi, md_atoms;
    double md_mass = 1.0;
    auto* measure = app.add_subcommand("measure", "densities of the projected measures");
    auto* density = measure->add_subcommand("density", "print {value, log_value}");
    measure->require_subcommand(1);
    density->add_option("--which", md_which, "mu|nu|v")->required()->check(CLI::IsMember({"mu", "nu", "v"}));
    add_common(density, md, false);
    density->add_option("--xi", md_xi, "cell vectors for mu/nu, e.g. '0.3;-0.2' (cells split by ';', components by ',')");
    density->add_option("--atoms", md_atoms, "configuration for v, e.g. '0.1:0.3;0.6:-1.0' (position:vector)");
    density->add_option("--mass", md_mass, "total mass for v");

    // kernel tabulate
    Common kt;
    double kt_lambda = 0.5, kt_xmax = 4.0;
    int kt_grid = 8;
    auto* kernel = app.add_subcommand("kernel", "kernel of the involution in the commutative model");
    auto* tab = kernel->add_subcommand("tabulate", "CSV table of the kernel on a grid along the first axis");
    kernel->require_subcommand(1);
    add_common(tab, kt, false);
    tab->add_option("--lambda", kt_lambda);
    tab->add_option("--grid", kt_grid, "points per axis, midpoints of [-xmax, xmax]");
    tab->add_option("--xmax", kt_xmax);

    // rep apply|check
    auto* rep = app.add_subcommand("rep", "operators of the complementary series in the commutative model");
    rep->require_subcommand(1);
    Common ra;
    double ra_lambda = 0.5;
    std::string ra_word, ra_grid = "12,25", ra_input = "gaussian";
    auto* apply = rep->add_subcommand("apply", "apply a group word to a test vector and print it on the node set");
    add_common(apply, ra, false);
    apply->add_option("--lambda", ra_lambda);
    apply->add_option("--g", ra_word, "word such as 'z:1.0|s|d:2.0'; the rightmost letter acts first")->required();
    apply->add_option("--grid", ra_grid, "node set 'order,xmax'");
    apply->add_option("--input", ra_input, "gaussian|vacuum")->check(CLI::IsMember({"gaussian", "vacuum"}));
    Common rc;
    std::string rc_suite;
    auto* rcheck = rep->add_subcommand("check", "representation checks");
    rcheck->add_option("--suite", rc_suite, "unitarity|involution|tau|spherical|cocycle")->required();
    add_common(rcheck, rc);

    // group check
    Common gc;
    int gc_trials = 100;
    auto* grp = app.add_subcommand("group", "group laws of O(n,1)");
    auto* gcheck = grp->add_subcommand("check", "residual report on random words");
    grp->require_subcommand(1);
    add_common(gcheck, gc);
    gcheck->add_option("--trials", gc_trials, "random elements per law");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*sf_eval) {
            const Dimensions dims = dims_of(sf_n);
            double v = 0.0;
            if (sf_fn == "I")
                v = specfun::bessel_i(sf_rho, sf_x);
            else if (sf_fn == "K")
                v = specfun::bessel_k(sf_rho, sf_x);
            else if (sf_fn == "V")
                v = specfun::v_rho(sf_rho, sf_x);
            else if (sf_fn == "g")
                v = specfun::levy_density(dims, sf_x);
            else
                v = std::pow(1.0 + 0.25 * sf_x * sf_x, -0.5 * sf_lambda);
            std::printf("%.17g\n", v);
            return 0;
        }
        if (*check) {
            if (!suites::is_suite(ck_suite)) {
                std::fprintf(stderr, "unknown suite '%s'\n", ck_suite.c_str());
                return kUsageError;
            }
            const auto cfg = run_config(check, ck);
            return run_check(cfg, ck_suite, suites::checks_for(ck_suite, cfg), "check_id");
        }
        if (*rcheck) {
            const auto cfg = run_config(rcheck, rc);
            return run_check(cfg, "rep:" + rc_suite, suites::rep_checks_for(rc_suite, cfg), "check");
        }
        if (*gcheck) {
            if (gc_trials < 1) throw ConfigError("trials must be positive");
            const auto cfg = run_config(gcheck, gc);
            return run_check(cfg, "group", suites::checks_for("group", cfg, gc_trials), "check_id");
        }
        if (*sample) {
            const Dimensions dims = dims_of(sm.n);
            Engine eng = make_engine({seed_of(sample, sm), 0});
            std::string text;
            if (sm_kind == "marginal") {
                const Partition p = sample->count("--partition") ? Partition::parse(sm.partition) : Partition({1.0});
                for (std::size_t k = 0; k < sm_count; ++k) {
                    json cells = json::array();
                    for (const auto& x : process::sample_marginal(dims, p, eng)) cells.push_back(vec_json(x));
                    text += json{{"xi", cells}}.dump() + "\n";
                }
            } else {
                if (!(sm_mass > 0.0) || !(sm_eps > 0.0)) throw ConfigError("process draws need mass > 0 and eps > 0");
                const process::JumpSampler js(dims, sm_eps, process::default_kappa(dims));
                for (std::size_t k = 0; k < sm_count; ++k) {
                    const auto c = js.sample(sm_mass, eng);
                    json atoms = json::array();
                    for (const auto& a : c.atoms) atoms.push_back({{"x", a.x}, {"c", vec_json(a.c)}});
                    text += json{{"atoms", atoms}, {"truncation_bound", c.truncation_bound}}.dump() + "\n";
                }
            }
            write_atomically(sm.out, text);
            return 0;
        }
        if (*density) {
            const Dimensions dims = dims_of(md.n);
            double lv = 0.0;
            if (md_which == "v") {
                if (md_atoms.empty()) throw ConfigError("--atoms is required for v");
                lv = measures::log_density_v(dims, parse_atoms(md_atoms, dims.d()), md_mass);
            } else {
                if (md_xi.empty()) throw ConfigError("--xi is required for mu and nu");
                const Partition p = density->count("--partition") ? Partition::parse(md.partition) : Partition({1.0});
                const auto xi = parse_cells(md_xi, dims.d());
                lv = md_which == "mu" ? measures::log_mu_density(dims, p, xi) : measures::log_nu_density(dims, p, xi);
            }
            write_atomically(md.out, json{{"value", std::exp(lv)}, {"log_value", lv}}.dump() + "\n");
            return 0;
        }
        if (*tab) {
            const Dimensions dims = dims_of(kt.n);
            if (kt_grid < 1 || !(kt_xmax > 0.0)) throw ConfigError("grid needs at least one point and xmax > 0");
            std::string text = "xi,xi_prime,value,err_est\n";
            char line[160];
            for (int i = 0; i < kt_grid; ++i)
                for (int j = 0; j < kt_grid; ++j) {
                    const double a = -kt_xmax + (i + 0.5) * 2.0 * kt_xmax / kt_grid;
                    const double b = -kt_xmax + (j + 0.5) * 2.0 * kt_xmax / kt_grid;
                    Vec x = Vec::Zero(dims.d()), y = Vec::Zero(dims.d());
                    x(0) = a;
                    y(0) = b;
                    const auto r = quadrature::kernel_A(dims, kt_lambda, x, y);
                    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.3e\n", a, b, r.value, r.abs_error_estimate);
                    text += line;
                }
            write_atomically(kt.out, text);
            return 0;
        }
        if (*apply) {
            const Dimensions dims = dims_of(ra.n);
            const auto word = parse_word(ra_word, dims);
            const auto g = split(ra_grid, ',');
            if (g.size() != 2) throw ConfigError("--grid needs 'order,xmax'");
            const reps::Grid grid = reps::make_grid(static_cast<int>(parse_double(g[0])), parse_double(g[1]));
            const reps::Field f = ra_input == "gaussian" ? reps::gaussian_field() : reps::vacuum(dims, ra_lambda);
            const reps::Field out = reps::t_comm_apply(dims, ra_lambda, word, f, &grid);
            json nodes = json::array(), re = json::array(), im = json::array();
            for (double x : grid.nodes) {
                Vec v = Vec::Zero(dims.d());
                v(0) = x;
                const auto z = out(v);
                nodes.push_back(x);
                re.push_back(z.real());
                im.push_back(z.imag());
            }
            json j{{"lambda", ra_lambda}, {"word", ra_word}, {"element", row_major(group::evaluate(word, dims))},
                   {"nodes", nodes},      {"re", re},        {"im", im}};
            write_atomically(ra.out, j.dump() + "\n");
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kRuntimeError;
    }
    return kUsageError;
}
