#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "currents/errors.hpp"
#include "currents/group.hpp"
#include "currents/measures.hpp"
#include "currents/process.hpp"
#include "currents/quadrature.hpp"
#include "currents/random.hpp"
#include "currents/reps.hpp"
#include "currents/specfun.hpp"

namespace currents::suites {

struct RunConfig {
    int n = 0;                          // 0: every dimension a check supports
    std::optional<Partition> partition;  // overrides the spherical partitions
    std::uint64_t seed = 20240611;
    std::map<std::string, double> tolerances;  // check_id -> tolerance override
    std::string output_path;
    std::string format = "json";
};

struct CheckReport {
    std::string check_id;
    std::string anchor;  // role of the identity being checked
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::int64_t runtime_ms = 0;
    std::optional<double> value;  // fitted constant, when the check produces one
    std::string error;            // exception text if the check threw
};

struct CheckOutcome {
    double residual = 0.0;
    std::optional<double> value;
};

struct CheckSpec {
    std::string id;
    std::string anchor;
    double tolerance = 0.0;
    int n = 0;  // 0: dimension independent
    std::function<CheckOutcome(Engine&)> run;
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"specfun",    "fourier",    "levy-khinchin", "measures", "coherence",
                                                "invariance", "group",      "reps",          "spherical", "all"};
    return names;
}

inline const std::vector<std::string>& rep_check_names() {
    static const std::vector<std::string> names{"unitarity", "involution", "tau", "spherical", "cocycle"};
    return names;
}

namespace detail {

// FNV-1a, so a check's stream depends only on its id
inline std::uint64_t stream_of(const std::string& id) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline Vec axis_vec(int d, double x) {
    Vec v = Vec::Zero(d);
    v(0) = x;
    return v;
}

inline Vec normal_vec(int d, Engine& eng) {
    boost::random::normal_distribution<double> nd;
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = nd(eng);
    return v;
}

inline double max_abs(const group::Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline reps::Field compact_bump(double radius) {
    return [radius](const Vec& xi) {
        const double t = xi.squaredNorm() / (radius * radius);
        return reps::Complex(t < 1.0 ? std::exp(-1.0 / (1.0 - t)) : 0.0, 0.0);
    };
}

inline const reps::Grid& operator_grid() {
    static const reps::Grid g = reps::make_grid(12, 25.0);
    return g;
}

inline const reps::Grid& wide_grid() {
    static const reps::Grid g = reps::make_grid(16, 36.0);
    return g;
}

inline double cn(int n) {
    static std::map<int, double> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, quadrature::calibrate_cn(Dimensions(n), std::numeric_limits<double>::infinity()).c_n).first;
    return it->second;
}

// ---- specfun ----

inline void add_specfun(std::vector<CheckSpec>& out) {
    out.push_back({"specfun.v_half_order_exponential", "v-function.half-order", 1e-12, 0, [](Engine&) {
                       double worst = 0.0;
                       for (int i = 0; i <= 500; ++i) {
                           const double x = 0.01 * i, e = std::exp(2.0 * x);
                           worst = std::max(worst, std::fabs(specfun::v_rho(0.5, x) - e) / e);
                       }
                       return CheckOutcome{worst};
                   }});
    out.push_back({"specfun.v_at_origin", "v-function.origin", 0.0, 0, [](Engine&) {
                       double worst = 0.0;
                       for (double rho : {0.3, 0.5, 1.0, 2.0, 5.0}) worst = std::max(worst, std::fabs(specfun::v_rho(rho, 0.0) - 1.0));
                       return CheckOutcome{worst};
                   }});
    for (double rho : {0.5, 1.0, 2.0}) {
        char id[64];
        std::snprintf(id, sizeof id, "specfun.v_small_x_branch.rho%g", rho);
        out.push_back({id, "v-function.small-argument", 1e-2, 0, [rho](Engine&) {
                           const double x = 1e-3, v = specfun::v_rho(rho, x);
                           return CheckOutcome{std::fabs(v - specfun::v_rho_asymptotic(rho, x)) / std::fabs(v - 1.0)};
                       }});
    }
    out.push_back({"specfun.v_reciprocal_of_normalized_k", "v-function.definition", 1e-10, 0, [](Engine&) {
                       double worst = 0.0;
                       for (double rho : {0.2, 0.5, 1.0, 1.5, 3.0})
                           for (double x : {1e-3, 0.1, 1.0, 4.0, 12.0}) {
                               const double prod = specfun::v_rho(rho, x) * (2.0 / std::tgamma(rho)) * std::pow(x, rho) * specfun::bessel_k(rho, x);
                               worst = std::max(worst, std::fabs(prod - 1.0));
                           }
                       return CheckOutcome{worst};
                   }});
    out.push_back({"specfun.k_against_boost", "bessel-k.values", 1e-12, 0, [](Engine&) {
                       double worst = 0.0;
                       for (double nu : {0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.3, 2.0, 2.5, 3.7, 6.0})
                           for (double x : {1e-4, 0.01, 0.2, 1.0, 1.99, 2.01, 5.0, 17.0, 60.0}) {
                               const double ref = boost::math::cyl_bessel_k(nu, x);
                               worst = std::max(worst, std::fabs(specfun::macdonald(nu, x) - ref) / ref);
                           }
                       return CheckOutcome{worst};
                   }});
    out.push_back({"specfun.k_half_order_closed_form", "bessel-k.half-order", 1e-13, 0, [](Engine&) {
                       double worst = 0.0;
                       for (double x : {1e-3, 0.3, 1.0, 2.5, 10.0, 40.0}) {
                           const double ref = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
                           worst = std::max(worst, std::fabs(specfun::macdonald(0.5, x) - ref) / ref);
                       }
                       return CheckOutcome{worst};
                   }});
    out.push_back({"specfun.i_half_order_closed_form", "bessel-i.half-order", 1e-13, 0, [](Engine&) {
                       double worst = 0.0;
                       for (double z : {1e-3, 0.3, 1.0, 2.5, 10.0}) {
                           const double x = 2.0 * z, ref = std::sqrt(2.0 / (std::numbers::pi * x)) * std::sinh(x);
                           worst = std::max(worst, std::fabs(specfun::bessel_i(0.5, z) - ref) / ref);
                       }
                       return CheckOutcome{worst};
                   }});
}

// ---- Fourier identities ----

inline void add_fourier(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        out.push_back({"fourier.power_transform_constant.n" + std::to_string(n), "fourier.power-transform", 1e-6, n, [n](Engine&) {
                           const auto ratios = quadrature::power_transform_ratios(Dimensions(n), {0.5, 1.0, 1.5}, {0.25, 0.5, 1.0, 2.0});
                           double mean = 0.0;
                           for (double r : ratios) mean += r / static_cast<double>(ratios.size());
                           return CheckOutcome{quadrature::relative_spread(ratios), mean};
                       }});
        const std::vector<double> lams = n == 2 ? std::vector<double>{0.25, 0.5, 0.75} : std::vector<double>{0.5, 1.0, 1.5};
        for (const char* profile : {"gaussian", "bump"}) {
            out.push_back({"fourier.power_pairing." + std::string(profile) + ".n" + std::to_string(n), "fourier.power-pairing", 1e-5, n,
                           [n, lams, profile](Engine&) {
                               const auto h = std::string(profile) == "gaussian" ? quadrature::gaussian_profile() : quadrature::bump_profile();
                               double worst = 0.0;
                               for (double lam : lams) worst = std::max(worst, quadrature::power_pairing_residual(Dimensions(n), lam, cn(n), h));
                               return CheckOutcome{worst};
                           }});
        }
        out.push_back({"fourier.inverse_v_transform.n" + std::to_string(n), "fourier.inverse-v", 1e-5, n, [n](Engine&) {
                           double worst = 0.0;
                           for (double rho : {0.3, 0.5, 1.0, 1.7})
                               for (double x : {0.0, 0.5, 1.0, 2.5}) {
                                   const double ref = quadrature::inverse_v_transform_closed(Dimensions(n), rho, x, cn(n));
                                   worst = std::max(worst, std::fabs(quadrature::inverse_v_transform(Dimensions(n), rho, x) - ref) / ref);
                               }
                           return CheckOutcome{worst};
                       }});
    }
}

inline void add_levy_khinchin(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        out.push_back({"levy-khinchin.single_constant.n" + std::to_string(n), "levy-khinchin.log-representation", 1e-4, n, [n](Engine&) {
                           const auto fit = quadrature::levy_khinchin_fit(Dimensions(n), {0.5, 1.0, 2.0, 4.0});
                           return CheckOutcome{fit.max_residual, fit.kappa};
                       }});
    }
}

// ---- measures ----

inline PointConfiguration three_atoms(int d) {
    PointConfiguration c;
    const double xs[3] = {0.13, 0.52, 0.81};
    const double v1[3][2] = {{0.7, 0.2}, {-1.1, 0.5}, {0.4, -0.9}};
    for (int k = 0; k < 3; ++k) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v(i) = v1[k][i];
        c.atoms.push_back({xs[k], v});
    }
    return c;
}

inline void add_measures(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        out.push_back({"measures.refinement_limit.n" + std::to_string(n), "measures.density-v-limit", 1e-2, n, [n](Engine&) {
                           const auto lim = measures::refinement_limit(Dimensions(n), three_atoms(n - 1), 1.0);
                           return CheckOutcome{lim.final_relative_error, lim.richardson_relative_error};
                       }});
        out.push_back({"measures.rn_matches_density_ratio.n" + std::to_string(n), "measures.radon-nikodym", 1e-10, n, [n](Engine& eng) {
                           const Dimensions dims(n);
                           const Partition p({0.3, 0.6, 0.9});
                           double worst = 0.0;
                           for (int k = 0; k < 100; ++k) {
                               const auto xi = process::sample_marginal(dims, p, eng);
                               const double a = measures::log_nu_density(dims, p, xi) - measures::log_mu_density(dims, p, xi);
                               worst = std::max(worst, std::fabs(a - measures::log_rn_derivative(dims, p, xi)));
                           }
                           return CheckOutcome{worst};
                       }});
    }
    out.push_back({"measures.mu_single_cell_normalization", "measures.mu-density", 1e-8, 2, [](Engine&) {
                       const Dimensions dims(2);
                       boost::math::quadrature::tanh_sinh<double> ts;
                       boost::math::quadrature::exp_sinh<double> es;
                       double worst = 0.0;
                       for (double lam : {0.5, 1.0, 2.5}) {
                           auto f = [&](double r) { return r < 1e-150 ? 0.0 : 2.0 * specfun::marginal_radial_density(dims, lam, r); };
                           const double total = ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, std::numeric_limits<double>::infinity());
                           worst = std::max(worst, std::fabs(total - 1.0));
                       }
                       return CheckOutcome{worst};
                   }});
}

inline void add_coherence(std::vector<CheckSpec>& out) {
    out.push_back({"coherence.nu_transform_exact", "coherence.nu", 1e-12, 0, [](Engine&) {
                       const Partition a({0.5, 1.0});
                       const CellVector g{(Vec(2) << 0.4, 1.0).finished(), (Vec(2) << -2.0, 0.3).finished()};
                       const auto ab = measures::split_evenly(a, 2);
                       const auto ac = measures::chain(ab, measures::split_cell(ab.child, 0, {0.1, 0.15}));
                       double worst = measures::mass_conservation_residual(ac);
                       worst = std::max(worst, measures::nu_coherence_residual(measures::split_cell(a, 1, {0.5, 0.5}), g));
                       worst = std::max(worst, measures::nu_coherence_residual(ac, g));
                       return CheckOutcome{worst};
                   }});
    for (double g : {0.7, 2.0}) {
        char id[64];
        std::snprintf(id, sizeof id, "coherence.mu_split_cell.n2.g%g", g);
        out.push_back({id, "coherence.mu", 3.0, 2, [g](Engine& eng) {
                           const auto r = measures::split_cell(Partition({1.0}), 0, {0.5, 0.5});
                           return CheckOutcome{process::check_coherence(Dimensions(2), r, {detail::axis_vec(1, g)}, 100000, eng).z_score};
                       }});
    }
    out.push_back({"coherence.mu_three_level_chain.n3", "coherence.mu", 3.0, 3, [](Engine& eng) {
                       const auto ab = measures::split_evenly(Partition({0.8, 1.2}), 2);
                       const auto bc = measures::split_cell(ab.child, 3, {0.2, 0.3, 0.1});
                       const CellVector gamma{(Vec(2) << 0.5, 0.5).finished(), (Vec(2) << -1.0, 0.2).finished()};
                       return CheckOutcome{process::check_coherence(Dimensions(3), measures::chain(ab, bc), gamma, 100000, eng).z_score};
                   }});
}

inline void add_invariance(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        const int d = n - 1;
        const Partition p = n == 2 ? Partition({0.3, 0.6, 0.9}) : Partition({0.3, 1.1, 1.9});
        out.push_back({"invariance.nu_rotation.n" + std::to_string(n), "invariance.rotation", 1e-12, n, [n, d, p](Engine& eng) {
                           double worst = 0.0;
                           for (int k = 0; k < 20; ++k) {
                               MarginalVector xi;
                               std::vector<Eigen::MatrixXd> u;
                               for (std::size_t i = 0; i < p.size(); ++i) {
                                   xi.push_back(detail::normal_vec(d, eng));
                                   u.push_back(group::random_orthogonal(d, eng));
                               }
                               worst = std::max(worst, measures::nu_rotation_residual(Dimensions(n), p, xi, u));
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"invariance.nu_log_mean_zero_scaling.n" + std::to_string(n), "invariance.scaling", 1e-12, n, [n, d, p](Engine& eng) {
                           double worst = 0.0;
                           for (int k = 0; k < 20; ++k) {
                               MarginalVector xi;
                               for (std::size_t i = 0; i < p.size(); ++i) xi.push_back(detail::normal_vec(d, eng));
                               worst = std::max(worst, measures::nu_scaling_residual(Dimensions(n), p, xi, {-0.3, 2.5, 7.0}));
                           }
                           return CheckOutcome{worst};
                       }});
    }
}

// ---- group ----

inline void add_group(std::vector<CheckSpec>& out, int trials = 100) {
    for (int n : {2, 3}) {
        const std::string sfx = ".n" + std::to_string(n);
        out.push_back({"group.cocycle_law" + sfx, "group.cocycle", 1e-6, n, [n, trials](Engine& eng) {
                           const Dimensions dims(n);
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const group::Mat g1 = group::random_member(dims, eng), g2 = group::random_member(dims, eng);
                               const Vec x = detail::normal_vec(n - 1, eng);
                               const double lhs = group::cocycle_beta(x, g1 * g2);
                               const double rhs = group::cocycle_beta(x, g1) * group::cocycle_beta(group::act(x, g1), g2);
                               worst = std::max(worst, std::fabs(lhs - rhs) / lhs);
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"group.jacobian_relation" + sfx, "group.boundary-jacobian", 1e-6, n, [n, trials](Engine& eng) {
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const group::Mat g = group::random_member(Dimensions(n), eng);
                               const Vec x = detail::normal_vec(n - 1, eng), y = detail::normal_vec(n - 1, eng);
                               worst = std::max(worst, group::measure_relation_check(g, x, y).jacobian);
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"group.distance_relation" + sfx, "group.boundary-distance", 1e-6, n, [n, trials](Engine& eng) {
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const group::Mat g = group::random_member(Dimensions(n), eng);
                               const Vec x = detail::normal_vec(n - 1, eng), y = detail::normal_vec(n - 1, eng);
                               worst = std::max(worst, group::measure_relation_check(g, x, y).distance);
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"group.reflection_factorization" + sfx, "group.translation-reflection", 1e-10, n, [n, trials](Engine& eng) {
                           const Dimensions dims(n);
                           const group::Mat s = group::make_s(dims);
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const Vec g = detail::normal_vec(n - 1, eng);
                               const group::Mat lhs = group::make_z(g) * s;
                               const group::Mat dg = group::d_of_gamma(g), zm = group::make_z(-g), zj = group::make_z(group::j_of_gamma(g));
                               const group::Mat rhs = dg * s * zm * s * zj;
                               // small |g| makes the factors large and the product cancels; scale by the factors
                               const double scale = std::max({1.0, detail::max_abs(lhs), detail::max_abs(dg) * detail::max_abs(zm) * detail::max_abs(zj)});
                               worst = std::max(worst, detail::max_abs(lhs - rhs) / scale);
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"group.factor_word_round_trip" + sfx, "group.bruhat-word", 1e-8, n, [n, trials](Engine& eng) {
                           const Dimensions dims(n);
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const group::Mat g = group::random_member(dims, eng);
                               worst = std::max(worst, detail::max_abs(group::evaluate(group::factor_word(g), dims) - g) / std::max(1.0, detail::max_abs(g)));
                           }
                           return CheckOutcome{worst};
                       }});
        out.push_back({"group.membership" + sfx, "group.form-preserved", 1e-9, n, [n, trials](Engine& eng) {
                           double worst = 0.0;
                           for (int k = 0; k < trials; ++k) {
                               const group::Mat g = group::random_member(Dimensions(n), eng);
                               worst = std::max(worst, group::membership_residual(g) / std::max(1.0, g.squaredNorm()));
                           }
                           return CheckOutcome{worst};
                       }});
    }
}

// ---- representations ----

inline void add_unitarity(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        out.push_back({"reps.unitarity.triangular_letters.n" + std::to_string(n), "reps.unitarity", 1e-6, n, [n](Engine&) {
                           const Dimensions dims(n);
                           const int d = n - 1;
                           const double lam = 0.5;
                           const Partition p({lam});
                           const reps::CurrentField f = reps::single_cell(detail::compact_bump(2.0));
                           const double base = reps::nu_norm_squared(dims, lam, reps::on_cell(f), 2.0);
                           double worst = 0.0;
                           for (double eps : {2.0, -0.5, 1.7}) {
                               group::TriangularElement b{eps, Eigen::MatrixXd::Identity(d, d), Vec::Constant(d, 0.9)};
                               if (d == 2) b.u << 0.6, -0.8, 0.8, 0.6;
                               const auto uf = reps::u_current_apply(p, {b}, f);
                               const double r = reps::nu_norm_squared(dims, lam, reps::on_cell(uf), 2.0 / std::fabs(eps));
                               worst = std::max(worst, std::fabs(r / base - 1.0));
                           }
                           return CheckOutcome{worst};
                       }});
    }
    out.push_back({"reps.unitarity.standard_model_letters.n2", "reps.unitarity", 1e-6, 2, [](Engine&) {
                       const Dimensions dims(2);
                       const double lam = 0.5;
                       auto f = [](const Vec& g) { return std::exp(-0.5 * g.squaredNorm()) * (1.0 + 0.3 * g(0)); };
                       auto as1 = [](std::function<double(const Vec&)> h) { return [h](double x) { return h(reps::scalar(x)); }; };
                       const double base = reps::inner_std_n2(lam, as1(f), as1(f)).value;
                       double worst = 0.0;
                       for (const auto& g : {group::make_z(reps::scalar(0.8)), group::make_d(-2.0, Eigen::MatrixXd::Constant(1, 1, 1.0)),
                                             group::GroupElement(group::make_s(dims))}) {
                           const auto tf = reps::t_std_apply(dims, lam, g, f);
                           worst = std::max(worst, std::fabs(reps::inner_std_n2(lam, as1(tf), as1(tf)).value / base - 1.0));
                       }
                       return CheckOutcome{worst};
                   }});
    out.push_back({"reps.plancherel.n2", "reps.commutative-model-norm", 1e-6, 2, [](Engine&) {
                       const double lam = 0.5;
                       const auto& grid = detail::operator_grid();
                       const auto phi = reps::sample(grid, [](const Vec& x) {
                           return reps::Complex(std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * x.squaredNorm()), 0.0);
                       });
                       const double comm = reps::comm_norm(lam, grid, phi);
                       auto f = [](double x) { return std::exp(-0.5 * x * x); };
                       const double std_value = reps::inner_std_n2(lam, f, f).value;
                       return CheckOutcome{std::fabs(std_value / (comm * comm / std::sqrt(std::numbers::pi)) - 1.0)};
                   }});
}

inline void add_involution(std::vector<CheckSpec>& out) {
    out.push_back({"reps.involution.square_is_identity.n2", "reps.involution", 1e-3, 2,
                   [](Engine&) { return CheckOutcome{reps::involution_square_residual(0.5, detail::operator_grid(), reps::gaussian_field())}; }});
    out.push_back({"reps.involution.fixed_vector.n2", "reps.involution", 1e-3, 2, [](Engine&) {
                       const auto& grid = detail::operator_grid();
                       const double lam = 0.5, rho = 0.25;
                       const reps::Field fixed = [rho](const Vec& x) {
                           const double r = std::fabs(x(0));
                           return reps::Complex(r == 0.0 ? 0.5 * std::tgamma(rho) * std::pow(std::sqrt(0.5), rho)
                                                         : std::pow(r, rho) * boost::math::cyl_bessel_k(rho, std::sqrt(2.0) * r),
                                                0.0);
                       };
                       const auto out_v = reps::sample(grid, reps::t_s(Dimensions(2), lam, grid, fixed));
                       return CheckOutcome{reps::relative_l2_error(lam, grid, out_v, reps::sample(grid, fixed))};
                   }});
    out.push_back({"reps.involution.diagonal_relation.n2", "reps.involution-diagonal", 1e-3, 2, [](Engine&) {
                       double worst = 0.0;
                       for (double eps : {2.0, -0.5, 1.3})
                           worst = std::max(worst, reps::relation_363_residual(0.5, eps, detail::operator_grid(), reps::gaussian_field()));
                       return CheckOutcome{worst};
                   }});
    out.push_back({"reps.involution.reflection_relation.n2", "reps.involution-translation", 1e-3, 2, [](Engine&) {
                       double worst = 0.0;
                       for (double g : {1.0, 1.5})
                           worst = std::max(worst, reps::relation_364_residual(0.5, g, detail::wide_grid(), reps::gaussian_field()));
                       return CheckOutcome{worst};
                   }});
    out.push_back({"reps.dual_transform.translation.n2", "reps.dual-covariance", 1e-12, 2, [](Engine&) {
                       double worst = 0.0;
                       for (double g : {0.5, 1.0, 2.0})
                           worst = std::max(worst, reps::r_covariance_residual(0.5, detail::operator_grid(), reps::gaussian_field(),
                                                                               group::make_z(reps::scalar(0.7)), g));
                       return CheckOutcome{worst};
                   }});
    out.push_back({"reps.dual_transform.diagonal.n2", "reps.dual-covariance", 1e-6, 2, [](Engine&) {
                       double worst = 0.0;
                       for (double g : {0.5, 1.0, 2.0})
                           for (double eps : {2.0, -0.6})
                               worst = std::max(worst, reps::r_covariance_residual(0.5, detail::operator_grid(), reps::gaussian_field(),
                                                                                   group::make_d(eps, Eigen::MatrixXd::Constant(1, 1, 1.0)), g));
                       return CheckOutcome{worst};
                   }});
    out.push_back({"reps.dual_transform.involution.n2", "reps.dual-covariance-involution", 1e-3, 2, [](Engine&) {
                       double worst = 0.0;
                       for (double g : {0.5, 1.0, 2.0})
                           worst = std::max(worst, reps::r_covariance_residual(0.5, detail::operator_grid(), reps::gaussian_field(),
                                                                               group::make_s(Dimensions(2)), g));
                       return CheckOutcome{worst};
                   }});
}

inline void add_tau(std::vector<CheckSpec>& out) {
    out.push_back({"reps.tau_isometry.n3", "reps.tau-isometry", 3.0, 3,
                   [](Engine& eng) { return CheckOutcome{reps::tau_isometry_check(Dimensions(3), 0.5, 0.7, 100000, eng).z_score}; }});
    for (int n : {2, 3}) {
        out.push_back({"reps.vacuum_spherical_ratio.n" + std::to_string(n), "reps.vacuum-ratio", 1e-6, n, [n](Engine&) {
                           const std::vector<double> lams = n == 2 ? std::vector<double>{0.5} : std::vector<double>{0.5, 1.0, 1.5};
                           double worst = 0.0;
                           for (double lam : lams) {
                               const auto rep = reps::vacuum_checks(Dimensions(n), lam, cn(n), {0.0, 0.5, 1.0, 2.0, 4.0});
                               worst = std::max({worst, rep.ratio_residual, rep.norm_residual});
                           }
                           return CheckOutcome{worst};
                       }});
    }
}

inline void add_cocycle(std::vector<CheckSpec>& out) {
    for (int n : {2, 3}) {
        out.push_back({"reps.special_cocycle_law.n" + std::to_string(n), "reps.special-cocycle", 1e-8, n, [n](Engine& eng) {
                           const int d = n - 1;
                           std::vector<Vec> pts;
                           for (int k = 0; k < 50; ++k) pts.push_back(process::gaussian_vector(d, 1.0, eng));
                           const group::TriangularElement z{1.0, Eigen::MatrixXd::Identity(d, d), Vec::Constant(d, 0.8)};
                           const group::TriangularElement dd{1.7, Eigen::MatrixXd::Identity(d, d), Vec::Zero(d)};
                           return CheckOutcome{reps::cocycle_law_check(Dimensions(n), z, dd, pts).correct_law};
                       }});
    }
    out.push_back({"reps.special_s_kernel.n2", "reps.special-involution", 1e-3, 2, [](Engine&) {
                       const auto& grid = detail::operator_grid();
                       double worst = 0.0;
                       for (double a : {std::sqrt(2.0), 1.0, 2.0}) {
                           const reps::Field e = [a](const Vec& x) { return reps::Complex(std::exp(-a * std::fabs(x(0))), 0.0); };
                           const auto got = reps::sample(grid, reps::t_s(Dimensions(2), 0.0, grid, e));
                           for (std::size_t j = 0; j < grid.size(); ++j)
                               worst = std::max(worst, std::abs(got[j] - std::exp(-2.0 * std::fabs(grid.nodes[j]) / a)));
                       }
                       return CheckOutcome{worst};
                   }});
}

inline void add_spherical(std::vector<CheckSpec>& out, const std::optional<Partition>& override_partition) {
    std::vector<Partition> parts;
    if (override_partition)
        parts.push_back(*override_partition);
    else
        parts = {Partition({1.0}), Partition({0.5, 0.5})};
    for (int n : {2, 3}) {
        for (std::size_t pi = 0; pi < parts.size(); ++pi) {
            const Partition p = parts[pi];
            for (double g : {0.0, 1.0, 2.0}) {
                char id[96];
                std::snprintf(id, sizeof id, "spherical.reproduce.n%d.p%zu.g%g", n, p.size(), g);
                out.push_back({id, "spherical.canonical-state", 3.0, n, [n, p, g](Engine& eng) {
                                   CellVector gamma;
                                   for (std::size_t i = 0; i < p.size(); ++i) gamma.push_back(detail::axis_vec(n - 1, i % 2 == 0 ? g : -g));
                                   const auto rep = reps::spherical_reproduce(Dimensions(n), p, gamma, 100000, eng);
                                   return CheckOutcome{rep.z_score, rep.estimate};
                               }});
            }
        }
    }
}

}  // namespace detail

inline bool is_suite(const std::string& s) {
    for (const auto& n : suite_names())
        if (n == s) return true;
    return false;
}

inline std::vector<CheckSpec> checks_for(const std::string& suite, const RunConfig& cfg, int group_trials = 100) {
    if (!is_suite(suite)) throw ConfigError("unknown suite '" + suite + "'");
    std::vector<CheckSpec> out;
    const bool all = suite == "all";
    if (all || suite == "specfun") detail::add_specfun(out);
    if (all || suite == "fourier") detail::add_fourier(out);
    if (all || suite == "levy-khinchin") detail::add_levy_khinchin(out);
    if (all || suite == "measures") detail::add_measures(out);
    if (all || suite == "coherence") detail::add_coherence(out);
    if (all || suite == "invariance") detail::add_invariance(out);
    if (all || suite == "group") detail::add_group(out, group_trials);
    if (all || suite == "reps") {
        detail::add_unitarity(out);
        detail::add_involution(out);
        detail::add_tau(out);
        detail::add_cocycle(out);
    }
    if (all || suite == "spherical") detail::add_spherical(out, cfg.partition);
    return out;
}

// the representation checks grouped as the rep subcommand exposes them
inline std::vector<CheckSpec> rep_checks_for(const std::string& name, const RunConfig& cfg) {
    std::vector<CheckSpec> out;
    if (name == "unitarity")
        detail::add_unitarity(out);
    else if (name == "involution")
        detail::add_involution(out);
    else if (name == "tau")
        detail::add_tau(out);
    else if (name == "spherical")
        detail::add_spherical(out, cfg.partition);
    else if (name == "cocycle")
        detail::add_cocycle(out);
    else
        throw ConfigError("unknown rep check '" + name + "'");
    return out;
}

inline void validate(const RunConfig& cfg) {
    if (cfg.n != 0 && cfg.n < 2) throw ConfigError("n must be at least 2");
    for (const auto& [id, tol] : cfg.tolerances)
        if (!(tol > 0.0)) throw ConfigError("tolerance for '" + id + "' must be positive");
    if (cfg.format != "json") throw ConfigError("check reports are JSON only");
}

// Runs the checks one after another; each owns the stream (seed, hash(check_id)).
inline std::vector<CheckReport> run_checks(const std::vector<CheckSpec>& specs, const RunConfig& cfg) {
    validate(cfg);
    std::vector<CheckReport> out;
    for (const auto& spec : specs) {
        if (cfg.n != 0 && spec.n != 0 && spec.n != cfg.n) continue;
        CheckReport r;
        r.check_id = spec.id;
        r.anchor = spec.anchor;
        const auto over = cfg.tolerances.find(spec.id);
        r.tolerance = over != cfg.tolerances.end() ? over->second : spec.tolerance;
        Engine eng = make_engine({cfg.seed, detail::stream_of(spec.id)});
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto o = spec.run(eng);
            r.residual = o.residual;
            r.value = o.value;
        } catch (const std::exception& e) {
            r.residual = std::numeric_limits<double>::quiet_NaN();
            r.error = e.what();
        }
        r.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        r.pass = r.residual <= r.tolerance;  // false for NaN
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<CheckReport> run_suite(const RunConfig& cfg, const std::string& suite) {
    return run_checks(checks_for(suite, cfg), cfg);
}

inline bool all_pass(const std::vector<CheckReport>& rs) {
    for (const auto& r : rs)
        if (!r.pass) return false;
    return true;
}

}  // namespace currents::suites
