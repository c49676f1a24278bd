#pragma once

#include <cmath>
#include <complex>
#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "currents/errors.hpp"
#include "currents/group.hpp"
#include "currents/measures.hpp"
#include "currents/process.hpp"
#include "currents/quadrature.hpp"
#include "currents/specfun.hpp"

namespace currents::reps {

using Complex = std::complex<double>;
using Field = std::function<Complex(const Vec&)>;
// function of (xi^1, ..., xi^l) over a partition
using CurrentField = std::function<Complex(const MarginalVector&)>;

inline constexpr double kPi = std::numbers::pi;

// ---- node sets for n = 2 ----

struct Grid {
    std::vector<double> nodes, weights;
    // weighted s-kernel matrices on the nodes, keyed by lam; shared between copies
    std::shared_ptr<std::map<double, std::shared_ptr<const Eigen::MatrixXd>>> kernels =
        std::make_shared<std::map<double, std::shared_ptr<const Eigen::MatrixXd>>>();
    std::size_t size() const { return nodes.size(); }
    // index of an exact node, or size()
    std::size_t find(double x) const {
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
        return it != nodes.end() && *it == x ? static_cast<std::size_t>(it - nodes.begin()) : size();
    }
};

// Composite Gauss-Legendre on [-x_max, x_max]. Panels shrink geometrically toward the
// origin, where the weight |xi|^{lam-1} and the s-kernel are singular, and widen like
// sqrt(x) outward, following the kernel's oscillation.
inline Grid make_grid(int order, double x_max, double inner = 1e-24) {
    if (order < 2 || !(x_max > 1.0) || !(inner > 0.0) || !(inner < 1.0))
        throw ConfigError("grid needs order >= 2, x_max > 1 and 0 < inner < 1");
    // Golub-Welsch via Eigen: eigenvalues of the Jacobi matrix
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) j(k, k - 1) = j(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<double> edges{0.0};
    constexpr double ratio = 0.1;
    const int levels = static_cast<int>(std::ceil(std::log(inner) / std::log(ratio)));
    for (int k = levels; k >= 0; --k) edges.push_back(std::pow(ratio, k));
    for (double x = 1.0; x < x_max;) {
        x = std::min(x + std::sqrt(x), x_max);
        if (x_max - x < 0.25 * std::sqrt(x)) x = x_max;
        edges.push_back(x);
    }
    std::vector<double> x, w;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double half = 0.5 * (edges[p + 1] - edges[p]), mid = 0.5 * (edges[p + 1] + edges[p]);
        for (int k = 0; k < order; ++k) {
            const double v0 = es.eigenvectors()(0, k);
            x.push_back(mid + half * es.eigenvalues()(k));
            w.push_back(2.0 * v0 * v0 * half);
        }
    }
    Grid g;
    for (std::size_t k = x.size(); k-- > 0;) {
        g.nodes.push_back(-x[k]);
        g.weights.push_back(w[k]);
    }
    g.nodes.insert(g.nodes.end(), x.begin(), x.end());
    g.weights.insert(g.weights.end(), w.begin(), w.end());
    return g;
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

inline std::vector<Complex> sample(const Grid& g, const Field& f) {
    std::vector<Complex> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = f(scalar(g.nodes[j]));
    return v;
}

// ---- commutative model of T^lam: primitives ----

inline Field t_z(const Vec& gamma0, Field phi) {
    return [gamma0, phi = std::move(phi)](const Vec& xi) { return std::exp(Complex(0.0, -xi.dot(gamma0))) * phi(xi); };
}

// |eps|^{lam/2} phi(eps xi u), xi a row vector
inline Field t_d(double lam, double eps, const Eigen::MatrixXd& u, Field phi) {
    if (eps == 0.0) throw DomainError("d needs eps != 0");
    const double factor = std::pow(std::fabs(eps), 0.5 * lam);
    return [=, phi = std::move(phi)](const Vec& xi) { return factor * phi(eps * (u.transpose() * xi)); };
}

inline void require_s_kernel(const Dimensions& dims, double lam) {
    if (dims.n != 2) throw ConfigError("the s-kernel on node sets is implemented for n = 2");
    if (!(lam >= 0.0) || !(lam < 1.0)) throw DomainError("the s-kernel needs 0 <= lam < n-1");
}

// n = 2 kernel with the (2 pi)^{-1} inversion factor; at lam = 0 the point mass at the
// origin is handled by the caller.
inline double s_kernel(double lam, double xi, double xi_prime) {
    if (xi == 0.0 || xi_prime == 0.0) return 0.0;
    return quadrature::kernel_A_closed_n2(lam, xi, xi_prime) / (2.0 * kPi);
}

// T_s phi = (2 pi)^{-1} int A(xi, xi') phi(xi') dxi', discretized on the node set; the
// result is the Nystrom interpolant, so it can be evaluated anywhere.
inline Field t_s(const Dimensions& dims, double lam, const Grid& grid, const Field& phi) {
    require_s_kernel(dims, lam);
    auto values = std::make_shared<std::vector<Complex>>(sample(grid, phi));
    const Complex at_zero = lam == 0.0 ? phi(scalar(0.0)) : Complex(0.0);
    auto& slot = (*grid.kernels)[lam];
    if (!slot) {
        Eigen::MatrixXd k(grid.size(), grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = 0; j < grid.size(); ++j) k(i, j) = grid.weights[j] * s_kernel(lam, grid.nodes[i], grid.nodes[j]);
        slot = std::make_shared<const Eigen::MatrixXd>(std::move(k));
    }
    return [lam, grid, values, at_zero, k = slot](const Vec& xi) {
        Complex s = at_zero;
        const std::size_t i = grid.find(xi(0));
        if (i < grid.size()) {
            for (std::size_t j = 0; j < grid.size(); ++j) s += (*k)(i, j) * (*values)[j];
        } else {
            for (std::size_t j = 0; j < grid.size(); ++j) s += grid.weights[j] * s_kernel(lam, xi(0), grid.nodes[j]) * (*values)[j];
        }
        return s;
    };
}

// Applies a word over B and s to phi: the last letter acts first.
inline Field t_comm_apply(const Dimensions& dims, double lam, const group::GroupWord& w, Field phi, const Grid* grid = nullptr) {
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        if (std::holds_alternative<group::SLetter>(*it)) {
            if (!grid) throw ConfigError("s letters need a node set");
            phi = t_s(dims, lam, *grid, phi);
        } else {
            const auto& b = std::get<group::TriangularElement>(*it);
            phi = t_z(b.gamma, t_d(lam, b.epsilon, b.u, std::move(phi)));
        }
    }
    return phi;
}

inline Field t_comm_apply(const Dimensions& dims, double lam, const group::GroupElement& g, Field phi, const Grid* grid = nullptr) {
    return t_comm_apply(dims, lam, group::factor_word(g), std::move(phi), grid);
}

// ---- norms ----

// Printed norm: C_lam int |xi|^{lam-d} |phi|^2 on the node set; lam = 0 uses int |xi|^{-d} |phi|^2.
inline double comm_norm(double lam, const Grid& g, const std::vector<Complex>& v) {
    const Dimensions dims(2);
    const double c = lam == 0.0 ? 1.0 : specfun::riesz_coefficient(dims, lam);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.weights[j] * std::pow(std::fabs(g.nodes[j]), lam - 1.0) * std::norm(v[j]);
    return std::sqrt(c * s);
}

inline double relative_l2_error(double lam, const Grid& g, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    std::vector<Complex> diff(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) diff[j] = a[j] - b[j];
    return comm_norm(lam, g, diff) / comm_norm(lam, g, b);
}

// int |f|^2 d nu_lam over a ball of radius R (single cell), by adaptive quadrature:
// tanh-sinh in the radius, periodic trapezoid in the angle for n = 3.
inline double nu_norm_squared(const Dimensions& dims, double lam, const Field& f, double radius) {
    const int d = dims.d();
    if (d > 2) throw ConfigError("nu_norm_squared is implemented for n <= 3");
    const double coef = std::pow(kPi, -0.5 * d) * specfun::riesz_coefficient(dims, lam);
    boost::math::quadrature::tanh_sinh<double> ts;
    auto radial = [&](double r) {
        if (r <= 0.0) return 0.0;
        double ang = 0.0;
        if (d == 1) {
            ang = std::norm(f(scalar(r))) + std::norm(f(scalar(-r)));
        } else {
            const int m = 64;
            for (int k = 0; k < m; ++k) {
                const double t = 2.0 * kPi * k / m;
                Vec x(2);
                x << r * std::cos(t), r * std::sin(t);
                ang += std::norm(f(x)) * 2.0 * kPi / m;
            }
        }
        return std::pow(r, lam - 1.0) * ang;
    };
    return coef * ts.integrate(radial, 0.0, radius);
}

// ---- current group on L2(nu_alpha) ----

// U_b f(xi) = exp(1/2 sum lam_i log|eps_i| + i sum <xi^i, gamma^i>) f(eps_i xi^i u_i)
inline CurrentField u_current_apply(const Partition& p, const std::vector<group::TriangularElement>& b, CurrentField f) {
    if (b.size() != p.size()) throw ConfigError("one triangular element per cell");
    return [p, b, f = std::move(f)](const MarginalVector& xi) {
        double log_mod = 0.0, phase = 0.0;
        MarginalVector moved(xi.size());
        for (std::size_t i = 0; i < xi.size(); ++i) {
            log_mod += 0.5 * p.masses[i] * std::log(std::fabs(b[i].epsilon));
            phase += xi[i].dot(b[i].gamma);
            moved[i] = b[i].epsilon * (b[i].u.transpose() * xi[i]);
        }
        return std::exp(Complex(log_mod, phase)) * f(moved);
    };
}

inline CurrentField single_cell(Field f) {
    return [f = std::move(f)](const MarginalVector& xi) { return f(xi.at(0)); };
}

inline Field on_cell(CurrentField f) {
    return [f = std::move(f)](const Vec& x) { return f(MarginalVector{x}); };
}

// tau phi(xi_1, ..., xi_l) = phi(xi_1 + ... + xi_l), grouped by a refinement
inline CurrentField tau_lift(const measures::Refinement& r, CurrentField f) {
    return [r, f = std::move(f)](const MarginalVector& xi) { return f(measures::push_down(r, xi)); };
}

// Involution I = U_s on a single cell, n = 2.
inline Field involution_apply(const Dimensions& dims, const Partition& p, const Grid& grid, const Field& f) {
    if (p.size() != 1) throw ConfigError("the involution on node sets is implemented for a single cell");
    return t_s(dims, p.masses[0], grid, f);
}

// ---- operator-level checks (n = 2) ----

inline Field gaussian_field(double width = 1.0) {
    return [width](const Vec& xi) { return Complex(std::exp(-0.5 * xi.squaredNorm() / (width * width)), 0.0); };
}

inline double involution_square_residual(double lam, const Grid& g, const Field& phi) {
    const Dimensions dims(2);
    const Field twice = t_s(dims, lam, g, t_s(dims, lam, g, phi));
    return relative_l2_error(lam, g, sample(g, twice), sample(g, phi));
}

// I U_{d(eps,u)} = U_{d(1/eps,u)} I
inline double relation_363_residual(double lam, double eps, const Grid& g, const Field& phi) {
    const Dimensions dims(2);
    const Eigen::MatrixXd u = Eigen::MatrixXd::Constant(1, 1, eps < 0 ? -1.0 : 1.0);
    const double e = std::fabs(eps);
    const Field lhs = t_s(dims, lam, g, t_d(lam, e, u, phi));
    const Field rhs = t_d(lam, 1.0 / e, u, t_s(dims, lam, g, phi));
    return relative_l2_error(lam, g, sample(g, lhs), sample(g, rhs));
}

// U_{z(gamma)} I = U_{d(gamma)} I U_{z(-gamma)} I U_{z(j gamma)}, with U_z = e^{+i<xi,gamma>}
inline double relation_364_residual(double lam, double gamma, const Grid& g, const Field& phi) {
    const Dimensions dims(2);
    const Vec gv = scalar(gamma);
    const auto uz = [](const Vec& a, Field f) { return t_z(-a, std::move(f)); };
    const Field lhs = uz(gv, t_s(dims, lam, g, phi));
    const group::GroupElement dg = group::d_of_gamma(gv);
    const Field inner = t_s(dims, lam, g, uz(-gv, t_s(dims, lam, g, uz(group::j_of_gamma(gv), phi))));
    const Field rhs = t_d(lam, dg(2, 2), dg.block(1, 1, 1, 1), inner);
    return relative_l2_error(lam, g, sample(g, lhs), sample(g, rhs));
}

// ---- vacuum ----

// f_lam(xi)^2 = |xi|^{(d-lam)/2} K_{(d-lam)/2}(2|xi|)
inline double vacuum_squared(const Dimensions& dims, double lam, double r) {
    const double rho = 0.5 * (dims.d() - lam);
    return std::exp(rho * std::log(r) + specfun::log_macdonald(rho, 2.0 * r));
}

inline Field vacuum(const Dimensions& dims, double lam) {
    return [dims, lam](const Vec& xi) {
        const double r = xi.norm();
        return Complex(r == 0.0 ? std::sqrt(0.5 * std::tgamma(0.5 * (dims.d() - lam))) : std::sqrt(vacuum_squared(dims, lam, r)), 0.0);
    };
}

struct VacuumReport {
    double ratio_residual = 0.0;  // max over gammas of |<T_z f, f>/|f|^2 - (1+|gamma|^2/4)^{-lam/2}|
    double norm_value = 0.0;      // int |xi|^{lam-d} f^2
    double norm_expected = 0.0;   // (2 pi)^d Gamma(lam/2) / (2 c_n)
    double norm_residual = 0.0;
};

inline VacuumReport vacuum_checks(const Dimensions& dims, double lam, double c_n, const std::vector<double>& gammas) {
    if (!(lam > 0.0) || !(lam < dims.d())) throw DomainError("vacuum checks need 0 < lam < n-1");
    const int d = dims.d();
    quadrature::RadialProfile prof{[&](double r) { return std::pow(r, lam - d) * vacuum_squared(dims, lam, r); }, 0.5 * (lam - d)};
    VacuumReport rep;
    const double at0 = quadrature::radial_fourier(dims, prof, 0.0).value;
    for (double g : gammas) {
        const double ratio = g == 0.0 ? 1.0 : quadrature::radial_fourier(dims, prof, g).value / at0;
        rep.ratio_residual = std::max(rep.ratio_residual, std::fabs(ratio - std::pow(1.0 + 0.25 * g * g, -0.5 * lam)));
    }
    rep.norm_value = at0;
    rep.norm_expected = std::pow(2.0 * kPi, d) * std::tgamma(0.5 * lam) / (2.0 * c_n);
    rep.norm_residual = std::fabs(rep.norm_value / rep.norm_expected - 1.0);
    return rep;
}

// ---- tau isometry (commutative form) ----

struct McReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double expected = 0.0;
    double z_score = 0.0;
};

inline McReport finish(const std::vector<double>& xs, double expected) {
    const auto e = process::mc_mean(xs);
    McReport r;
    r.estimate = e.mean;
    r.std_error = e.std_error;
    r.expected = expected;
    r.z_score = r.std_error > 0.0 ? std::fabs(r.estimate - expected) / r.std_error : (r.estimate == expected ? 0.0 : INFINITY);
    return r;
}

namespace detail {

inline double log_nu_single(const Dimensions& dims, double lam, const Vec& xi) {
    return measures::log_nu_cell(dims, lam, xi.norm());
}

// radial beta-prime(alpha, 1) law spread uniformly over directions
struct BetaPrimeRadial {
    double alpha;
    double log_density(const Dimensions& dims, const Vec& x) const {
        const double r = x.norm();
        const int d = dims.d();
        const double lp = std::log(alpha) + (alpha - 1.0) * std::log(r) - (alpha + 1.0) * std::log1p(r);
        return lp - std::log(specfun::sphere_area(d)) - (d - 1.0) * std::log(r);
    }
    Vec draw(const Dimensions& dims, Engine& eng) const {
        boost::random::gamma_distribution<double> ga(alpha, 1.0), gb(1.0, 1.0);
        const double r = ga(eng) / gb(eng);
        Vec v;
        do v = process::gaussian_vector(dims.d(), 1.0, eng);
        while (v.norm() == 0.0);
        return r * v / v.norm();
    }
};

}  // namespace detail

// int int nu_{lam1}(xi1) nu_{lam2}(xi2) |phi(xi1+xi2)|^2 against int nu_{lam1+lam2} |phi|^2
// for phi = e^{-|eta|^2/2}. eta ~ N(0, I/2) and xi1 from an even mixture of radial
// beta-prime laws centred at 0 and at eta, matching the two singularities.
inline McReport tau_isometry_check(const Dimensions& dims, double lam1, double lam2, std::size_t samples, Engine& eng) {
    const int d = dims.d();
    const double lam = lam1 + lam2;
    if (!(lam < d)) throw DomainError("tau needs the total mass below n-1");
    const detail::BetaPrimeRadial at0{lam1}, at_eta{lam2};
    std::vector<double> xs(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const Vec eta = process::gaussian_vector(d, 0.5, eng);
        boost::random::uniform_01<double> u01;
        const Vec xi1 = u01(eng) < 0.5 ? at0.draw(dims, eng) : Vec(eta + at_eta.draw(dims, eng));
        const Vec xi2 = eta - xi1;
        if (xi1.norm() == 0.0 || xi2.norm() == 0.0) {
            xs[k] = 0.0;
            continue;
        }
        const double log_p_eta = -eta.squaredNorm() - 0.5 * d * std::log(kPi);
        const double q = 0.5 * std::exp(at0.log_density(dims, xi1)) + 0.5 * std::exp(at_eta.log_density(dims, xi2));
        const double log_num = -eta.squaredNorm() + detail::log_nu_single(dims, lam1, xi1) + detail::log_nu_single(dims, lam2, xi2);
        xs[k] = std::exp(log_num - log_p_eta) / q;
    }
    const double expected = std::pow(kPi, -0.5 * d) * specfun::riesz_coefficient(dims, lam) * specfun::sphere_area(d) * 0.5 * std::tgamma(0.5 * lam);
    return finish(xs, expected);
}

// ---- dual transform ----

// R f(gamma) = pi^{-1/2} C_lam int f(xi) e^{i xi gamma} |xi|^{lam-1} dxi on the node set (n = 2)
inline Complex r_transform(double lam, const Grid& g, const std::vector<Complex>& f, double gamma) {
    const Dimensions dims(2);
    const double coef = std::pow(kPi, -0.5) * specfun::riesz_coefficient(dims, lam);
    Complex s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        s += g.weights[j] * std::pow(std::fabs(g.nodes[j]), lam - 1.0) * f[j] * std::exp(Complex(0.0, g.nodes[j] * gamma));
    return coef * s;
}

// R(U_g f)(gamma) against beta(gamma, g)^{-lam/2} R f(gamma g-bar) for a single letter g
// of the form z, d or s; returns the relative residual.
inline double r_covariance_residual(double lam, const Grid& g, const Field& f, const group::GroupElement& letter, double gamma,
                                    group::BetaForm form = group::BetaForm::last_column) {
    const Dimensions dims(2);
    Field uf;
    if (group::in_triangular(letter)) {
        const auto b = group::triangular_from_matrix(letter);
        uf = t_z(-b.gamma, t_d(lam, b.epsilon, b.u, f));
    } else {
        const auto w = group::factor_word(letter);
        if (w.size() != 1 || !std::holds_alternative<group::SLetter>(w[0])) throw ConfigError("covariance check takes z, d or s letters");
        uf = t_s(dims, lam, g, f);
    }
    const Complex lhs = r_transform(lam, g, sample(g, uf), gamma);
    const Vec gv = scalar(gamma);
    const double beta = group::cocycle_beta(gv, letter, form);
    const Complex rhs = std::pow(beta, -0.5 * lam) * r_transform(lam, g, sample(g, f), group::act(gv, letter)(0));
    return std::abs(lhs - rhs) / std::abs(rhs);
}

// ---- spherical function reproduction ----

struct SphericalReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double expected = 0.0;  // big_psi
    double z_score = 0.0;
    bool weight_is_limit = false;  // nu undefined for a cell of mass n-1; weight taken as its limit 1
    double max_weight_deviation = 0.0;
    double vacuum_norm = 0.0;  // empirical <v^{-1/2}, v^{-1/2}>_nu
};

// <U_{z(gamma)} v^{-1/2}, v^{-1/2}>_{L2(nu)} estimated from mu draws weighted by
// (d nu / d mu) / v; the weight is 1 up to rounding.
inline SphericalReport spherical_reproduce(const Dimensions& dims, const Partition& p, const CellVector& gamma, std::size_t samples,
                                           Engine& eng) {
    SphericalReport rep;
    bool nu_defined = true;
    for (double lam : p.masses) nu_defined = nu_defined && lam < dims.d();
    rep.weight_is_limit = !nu_defined;
    std::vector<double> re(samples), w1(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto xi = process::sample_marginal(dims, p, eng);
        double w = 1.0;
        bool any_zero = false;
        for (const auto& x : xi) any_zero = any_zero || x.norm() == 0.0;
        if (nu_defined && !any_zero) {
            const double log_ratio = measures::log_nu_density(dims, p, xi) - measures::log_mu_density(dims, p, xi);
            w = std::exp(log_ratio - measures::log_rn_derivative(dims, p, xi));
        }
        rep.max_weight_deviation = std::max(rep.max_weight_deviation, std::fabs(w - 1.0));
        re[k] = w * std::cos(process::pairing(xi, gamma));
        w1[k] = w;
    }
    const auto e = process::mc_mean(re);
    rep.estimate = e.mean;
    rep.std_error = e.std_error;
    rep.expected = measures::big_psi(p, gamma);
    rep.vacuum_norm = process::mc_mean(w1).mean;
    const double diff = std::fabs(rep.estimate - rep.expected);
    // at gamma = 0 the spread comes only from roundoff in the weights; floor the scale
    rep.z_score = diff / std::hypot(rep.std_error, 1e-12);
    return rep;
}

// ---- special representation and its cocycle ----

// f_0(xi) = (|xi|^{d/2} K_{d/2}(2|xi|))^{1/2}
inline Field f0(const Dimensions& dims) { return vacuum(dims, 0.0); }

// b(g) = T^0_g f_0 - f_0
inline Field special_cocycle(const Dimensions& dims, const group::GroupWord& w, const Grid* grid = nullptr) {
    const Field f = f0(dims);
    const Field tf = t_comm_apply(dims, 0.0, w, f, grid);
    return [f, tf](const Vec& xi) { return tf(xi) - f(xi); };
}

struct CocycleLawReport {
    double correct_law = 0.0;  // max |b(g1 g2) - T_{g1} b(g2) - b(g1)| on the points
    double printed_law = 0.0;  // max |b(g1 g2) - T_{g2} b(g1) - b(g2)|
};

inline CocycleLawReport cocycle_law_check(const Dimensions& dims, const group::TriangularElement& g1, const group::TriangularElement& g2,
                                          const std::vector<Vec>& points) {
    const auto prod = group::compose(g1, g2);
    const Field b12 = special_cocycle(dims, {prod});
    const Field b1 = special_cocycle(dims, {g1}), b2 = special_cocycle(dims, {g2});
    const Field t1b2 = t_comm_apply(dims, 0.0, group::GroupWord{g1}, b2);
    const Field t2b1 = t_comm_apply(dims, 0.0, group::GroupWord{g2}, b1);
    CocycleLawReport r;
    for (const auto& x : points) {
        r.correct_law = std::max(r.correct_law, std::abs(b12(x) - t1b2(x) - b1(x)));
        r.printed_law = std::max(r.printed_law, std::abs(b12(x) - t2b1(x) - b2(x)));
    }
    return r;
}

// ---- standard model ----

// T_g f(gamma) = f(gamma g-bar) beta^{1-n+lam/2}(gamma, g). The point sent to infinity is a
// null set; the evaluator returns 0 there.
inline std::function<double(const Vec&)> t_std_apply(const Dimensions& dims, double lam, const group::GroupElement& g,
                                                     std::function<double(const Vec&)> f) {
    const double k = 1.0 - dims.n + 0.5 * lam;
    return [=, f = std::move(f)](const Vec& gamma) {
        const auto b = group::detail::action_blocks(gamma, g);
        if (b.denom == 0.0) return 0.0;
        return f(b.numer / b.denom) * std::pow(std::fabs(b.denom), k);
    };
}

struct InnerReport {
    double value = 0.0;
    double error_estimate = 0.0;
};

// int int |g' - g''|^{-lam} f1(g') f2(g'') for n = 2, written as int |t|^{-lam} h(t) dt with
// the correlation h(t) = int f1(x) f2(x + t) dx.
inline InnerReport inner_std_n2(double lam, const std::function<double(double)>& f1, const std::function<double(double)>& f2) {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    // the s letter deletes the origin, so split the correlation at 0 and -t
    auto h = [&](double t) {
        auto k = [&](double x) { return f1(x) * f2(x + t); };
        const double a = std::min(0.0, -t), b = std::max(0.0, -t);
        const double inf = std::numeric_limits<double>::infinity();
        double v = es.integrate(k, -inf, a) + es.integrate(k, b, inf);
        if (b > a) v += ts.integrate(k, a, b);
        return v;
    };
    auto g = [&](double t) { return t <= 0.0 ? 0.0 : std::pow(t, -lam) * (h(t) + h(-t)); };
    InnerReport r;
    double e1 = 0.0, e2 = 0.0;
    r.value = ts.integrate(g, 0.0, 1.0, std::sqrt(std::numeric_limits<double>::epsilon()), &e1) +
              es.integrate(g, 1.0, std::numeric_limits<double>::infinity(), std::sqrt(std::numeric_limits<double>::epsilon()), &e2);
    r.error_estimate = (e1 + e2) * std::fabs(r.value);
    return r;
}

// Monte Carlo for general n: g' ~ N(0, s^2 I), t = g'' - g' from the radial law
// |t|^{-lam} e^{-|t|^2 / (2 s^2)} normalized; returns the mean and its standard error.
inline InnerReport inner_std_mc(const Dimensions& dims, double lam, const std::function<double(const Vec&)>& f1,
                                const std::function<double(const Vec&)>& f2, std::size_t samples, Engine& eng, double s = 1.0) {
    const int d = dims.d();
    if (!(lam < d)) throw DomainError("inner_std needs lam < n-1");
    boost::random::gamma_distribution<double> gd(0.5 * (d - lam), 1.0);
    // normalizer of |t|^{-lam} e^{-|t|^2/(2 s^2)}: |S| (2 s^2)^{(d-lam)/2} Gamma((d-lam)/2) / 2
    const double z = specfun::sphere_area(d) * std::pow(2.0 * s * s, 0.5 * (d - lam)) * std::tgamma(0.5 * (d - lam)) / 2.0;
    std::vector<double> xs(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const Vec g1 = process::gaussian_vector(d, s * s, eng);
        const double r = std::sqrt(2.0 * s * s * gd(eng));
        Vec dir;
        do dir = process::gaussian_vector(d, 1.0, eng);
        while (dir.norm() == 0.0);
        const Vec t = r * dir / dir.norm();
        const double log_p = -0.5 * g1.squaredNorm() / (s * s) - 0.5 * d * std::log(2.0 * kPi * s * s);
        // ratio |t|^{-lam} / q(t) = z e^{|t|^2/(2 s^2)}
        xs[k] = f1(g1) * f2(g1 + t) * z * std::exp(0.5 * t.squaredNorm() / (s * s) - log_p);
    }
    const auto e = process::mc_mean(xs);
    return {e.mean, e.std_error};
}

}  // namespace currents::reps
