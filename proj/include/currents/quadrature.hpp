#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "currents/errors.hpp"
#include "currents/specfun.hpp"

namespace currents::quadrature {

struct QuadratureReport {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long nodes_used = 0;
};

struct RadialProfile {
    std::function<double(double)> evaluator;
    double singularity_exponent = 0.0;
    double support_radius = std::numeric_limits<double>::infinity();
};

struct FourierConstant {
    int n = 0;
    double c_n = 0.0;
    double spread = 0.0;  // (max - min) / mean of the per-point ratios
    std::vector<double> ratios;
};

namespace detail {

struct WynnResult {
    double value;
    double error;
};

// Wynn's epsilon algorithm on a sequence of partial sums. Returns the even-column
// entry whose last two values agree best.
inline WynnResult wynn_epsilon(const std::vector<double>& s) {
    const std::size_t n = s.size();
    if (n == 0) return {0.0, 0.0};
    if (n < 3) return {s.back(), n == 2 ? std::fabs(s[1] - s[0]) : std::fabs(s[0])};
    WynnResult best{s.back(), std::fabs(s[n - 1] - s[n - 2])};
    std::vector<double> prev2(n + 1, 0.0), prev(s), cur;
    for (std::size_t k = 1; k < n; ++k) {
        cur.assign(n - k, 0.0);
        bool ok = true;
        for (std::size_t j = 0; j + k < n; ++j) {
            const double diff = prev[j + 1] - prev[j];
            if (diff == 0.0 || !std::isfinite(diff)) {
                ok = false;
                break;
            }
            cur[j] = prev2[j + 1] + 1.0 / diff;
            if (!std::isfinite(cur[j])) {
                ok = false;
                break;
            }
        }
        if (!ok) break;
        if (k % 2 == 0 && cur.size() >= 2) {
            const double err = std::fabs(cur.back() - cur[cur.size() - 2]);
            if (err < best.error) best = {cur.back(), err};
        }
        prev2 = prev;
        prev = cur;
    }
    return best;
}

template <class F>
double gk(F&& f, double a, double b, double* err) {
    double e = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 6, 1e-14, &e);
    if (err) *err = e;
    return v;
}

// Integrates f over [a, inf) as a sum of panels [a, b0], [b0, b1], ... and accelerates
// the partial sums. The first panel uses tanh-sinh for endpoint singularities.
template <class F>
QuadratureReport panel_sum(F&& f, double a, const std::vector<double>& bounds, bool singular_start) {
    QuadratureReport rep;
    std::vector<double> partial;
    partial.reserve(bounds.size());
    double sum = 0.0, panel_err = 0.0, lo = a;
    int quiet = 0;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        const double hi = bounds[k];
        double e = 0.0, v;
        if (k == 0 && singular_start) {
            boost::math::quadrature::tanh_sinh<double> ts;
            double l1 = 0.0;
            std::size_t levels = 0;
            v = ts.integrate(f, lo, hi, 1e-14, &e, &l1, &levels);
            rep.nodes_used += 1L << (levels + 4);
        } else {
            v = gk(f, lo, hi, &e);
            rep.nodes_used += 31;
        }
        sum += v;
        panel_err += e;
        partial.push_back(sum);
        lo = hi;
        // the integrand has died out: no acceleration needed
        quiet = std::fabs(v) <= 1e-17 * std::fabs(sum) ? quiet + 1 : 0;
        if (quiet >= 3) {
            rep.value = sum;
            rep.abs_error_estimate = panel_err + 3 * std::fabs(v);
            return rep;
        }
    }
    const auto w = wynn_epsilon(partial);
    rep.value = w.value;
    rep.abs_error_estimate = w.error + panel_err;
    return rep;
}

// Zeros of the radial oscillator: cos for d = 1, J_{d/2-1} otherwise.
inline std::vector<double> oscillator_zeros(int d, int count) {
    std::vector<double> z(count);
    if (d == 1) {
        for (int k = 0; k < count; ++k) z[k] = (k + 0.5) * std::numbers::pi;
    } else {
        const double nu = 0.5 * d - 1.0;
        for (int k = 0; k < count; ++k) z[k] = boost::math::cyl_bessel_j_zero(nu, k + 1);
    }
    return z;
}

// (2 pi)^{d/2} x^{-nu} J_nu(x), nu = d/2 - 1: the angular average of e^{i<v, e>} over
// directions with |v| = x, times the sphere area. For d = 1 it is 2 cos x.
inline double angular_kernel(int d, double x) {
    if (d == 1) return 2.0 * std::cos(x);
    const double nu = 0.5 * d - 1.0;
    const double c = std::pow(2.0 * std::numbers::pi, 0.5 * d);
    if (x < 1e-8) return c * std::pow(0.5, nu) / std::tgamma(nu + 1.0);
    return c * std::pow(x, -nu) * boost::math::cyl_bessel_j(nu, x);
}

// Phi_d(t) - 1 where Phi_d is the normalized angular average (Phi_d(0) = 1).
inline double angular_average_minus_one(int d, double t) {
    if (d == 1) {
        const double s = std::sin(0.5 * t);
        return -2.0 * s * s;
    }
    const double nu = 0.5 * d - 1.0;
    if (t < 1.0) {
        // 0F1(; nu+1; -t^2/4) - 1
        double term = 1.0, sum = 0.0;
        const double q = -0.25 * t * t;
        for (int k = 1; k < 40; ++k) {
            term *= q / (k * (nu + k));
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
        }
        return sum;
    }
    return std::tgamma(nu + 1.0) * std::pow(2.0 / t, nu) * boost::math::cyl_bessel_j(nu, t) - 1.0;
}

}  // namespace detail

// Fourier transform int f(|x|) e^{i<xi, x>} dx over R^d at |xi| = r_out, reduced to a
// one-dimensional Hankel-type integral.
inline QuadratureReport radial_fourier(const Dimensions& dims, const RadialProfile& profile, double r_out,
                                       int max_panels = 60) {
    const int d = dims.d();
    const auto& f = profile.evaluator;
    if (r_out < 0.0) throw DomainError("radial_fourier needs r_out >= 0");
    if (r_out == 0.0) {
        const double area = specfun::sphere_area(d);
        // below 1e-100 an integrable endpoint singularity contributes nothing but may overflow
        auto g = [&](double r) { return r > 1e-100 ? area * f(r) * std::pow(r, d - 1) : 0.0; };
        boost::math::quadrature::tanh_sinh<double> ts;
        boost::math::quadrature::exp_sinh<double> es;
        double e1 = 0.0, e2 = 0.0;
        const double v = ts.integrate(g, 0.0, 1.0, 1e-14, &e1) +
                         es.integrate(g, 1.0, std::numeric_limits<double>::infinity(), 1e-14, &e2);
        return {v, e1 + e2, 0};
    }
    auto zeros = detail::oscillator_zeros(d, max_panels);
    for (auto& z : zeros) z /= r_out;
    QuadratureReport rep;
    if (d == 1) {
        rep = detail::panel_sum([&](double r) { return r > 1e-100 ? 2.0 * f(r) * std::cos(r_out * r) : 0.0; }, 0.0, zeros, true);
    } else {
        const double nu = 0.5 * d - 1.0;
        const double pre = std::pow(2.0 * std::numbers::pi, 0.5 * d) * std::pow(r_out, -nu);
        rep = detail::panel_sum(
            [&](double r) { return r > 1e-100 ? pre * f(r) * std::pow(r, 0.5 * d) * boost::math::cyl_bessel_j(nu, r_out * r) : 0.0; },
            0.0, zeros, true);
    }
    if (!std::isfinite(rep.value)) throw ConvergenceError("radial_fourier: non-finite result");
    return rep;
}

// Right-hand side shape of the power Fourier identity without the constant:
// (2/Gamma(lam/2)) r^{(lam-d)/2} K_{(d-lam)/2}(2r).
inline double power_transform_shape(const Dimensions& dims, double lambda, double r) {
    const double d = dims.d();
    return 2.0 / std::tgamma(0.5 * lambda) * std::pow(r, 0.5 * (lambda - d)) * specfun::macdonald(0.5 * (d - lambda), 2.0 * r);
}

inline RadialProfile power_profile(double lambda) {
    return {[lambda](double r) { return std::pow(1.0 + 0.25 * r * r, -0.5 * lambda); }, 0.0};
}

// Ratio of the quadrature transform of (1+|x|^2/4)^{-lam/2} to the Bessel shape, for
// every (lambda, |xi|) pair. Constancy of the ratio is the identity.
inline std::vector<double> power_transform_ratios(const Dimensions& dims, const std::vector<double>& lambdas,
                                                  const std::vector<double>& radii) {
    std::vector<double> out;
    for (double lam : lambdas)
        for (double r : radii) out.push_back(radial_fourier(dims, power_profile(lam), r).value / power_transform_shape(dims, lam, r));
    return out;
}

inline double relative_spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    return (*hi - *lo) / std::fabs(mean);
}

inline FourierConstant calibrate_cn(const Dimensions& dims, double max_spread = 1e-6) {
    FourierConstant fc;
    fc.n = dims.n;
    fc.ratios = power_transform_ratios(dims, {0.5, 1.0, 1.5}, {0.25, 0.5, 1.0, 2.0});
    double mean = 0.0;
    for (double x : fc.ratios) mean += x;
    fc.c_n = mean / static_cast<double>(fc.ratios.size());
    fc.spread = relative_spread(fc.ratios);
    if (!(fc.spread <= max_spread))
        throw CalibrationError("c_n spread " + std::to_string(fc.spread) + " exceeds " + std::to_string(max_spread));
    return fc;
}

// Same identity rewritten with lambda = 2 rho + d; both sides evaluated in closed form.
inline double shifted_form_residual(const Dimensions& dims, double rho, double r) {
    const double d = dims.d();
    const double lam = 2.0 * rho + d;
    const double lhs = power_transform_shape(dims, lam, r);
    const double rhs = 2.0 / std::tgamma(0.5 * d + rho) * std::pow(r, rho) * specfun::macdonald(rho, 2.0 * r);
    return std::fabs(lhs - rhs) / std::fabs(rhs);
}

// Test profiles on the xi side for the pairing form of the |gamma|^{-lam} transform.
inline RadialProfile gaussian_profile() {
    return {[](double r) { return std::exp(-0.5 * r * r); }, 0.0};
}

// exp(-1/(1 - (r/R)^2)) on r < R. A wide support makes the transform decay fast in |gamma|.
inline RadialProfile bump_profile(double radius = 16.0) {
    return {[radius](double r) {
                const double t = r / radius;
                return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
            },
            0.0, radius};
}

namespace detail {

// Transform of a compactly supported profile by a fixed composite Gauss rule, with the
// profile values cached across output radii.
class CompactTransform {
public:
    CompactTransform(int d, const RadialProfile& h, int panels = 64) : d_(d) {
        using rule = boost::math::quadrature::gauss<double, 30>;
        const double width = h.support_radius / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = (p + 0.5) * width;
            auto add = [&](double x, double w) {
                const double r = mid + 0.5 * width * x;
                nodes_.push_back(r);
                weights_.push_back(0.5 * width * w * h.evaluator(r) * (d == 1 ? 2.0 : std::pow(r, 0.5 * d)));
            };
            const auto& xs = rule::abscissa();
            const auto& ws = rule::weights();
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (xs[k] == 0.0) {
                    add(0.0, ws[k]);
                    continue;
                }
                add(xs[k], ws[k]);
                add(-xs[k], ws[k]);
            }
        }
    }

    double operator()(double rho) const {
        double sum = 0.0;
        if (d_ == 1) {
            for (std::size_t k = 0; k < nodes_.size(); ++k) sum += weights_[k] * std::cos(rho * nodes_[k]);
            return sum;
        }
        const double nu = 0.5 * d_ - 1.0;
        if (rho == 0.0) {
            // J_nu(x) x^{-nu} -> 2^{-nu} / Gamma(nu+1)
            for (std::size_t k = 0; k < nodes_.size(); ++k) sum += weights_[k] * std::pow(nodes_[k], nu);
            return std::pow(2.0 * std::numbers::pi, 0.5 * d_) * std::pow(0.5, nu) / std::tgamma(nu + 1.0) * sum;
        }
        for (std::size_t k = 0; k < nodes_.size(); ++k) sum += weights_[k] * boost::math::cyl_bessel_j(nu, rho * nodes_[k]);
        return std::pow(2.0 * std::numbers::pi, 0.5 * d_) * std::pow(rho, -nu) * sum;
    }

private:
    int d_;
    std::vector<double> nodes_, weights_;
};

}  // namespace detail

// Pairing form of int |gamma|^{-lam} e^{i<xi,gamma>} dgamma = c_n C_lam |xi|^{lam-d}:
// int |gamma|^{-lam} h^(gamma) dgamma against c_n C_lam int h(xi) |xi|^{lam-d} dxi.
// Returns the relative residual.
inline double power_pairing_residual(const Dimensions& dims, double lambda, double c_n, const RadialProfile& h) {
    const int d = dims.d();
    const double area = specfun::sphere_area(d);
    const bool compact = std::isfinite(h.support_radius);
    std::optional<detail::CompactTransform> ct;
    if (compact) ct.emplace(d, h);
    auto hat = [&](double rho) { return compact ? (*ct)(rho) : radial_fourier(dims, h, rho).value; };
    // the transform is smooth and even: freeze it near the origin
    const double hat0 = hat(0.0);
    auto outer = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        return area * std::pow(rho, d - 1 - lambda) * (rho < 1e-6 ? hat0 : hat(rho));
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double lhs = ts.integrate(outer, 0.0, 1.0, 1e-12);
    // the transform decays at least like exp(-sqrt(R rho)); march until negligible.
    // Non-adaptive panels: once the transform reaches roundoff, refinement only chases noise.
    int quiet = 0;
    for (double a = 1.0; a < 2000.0 && quiet < 4; a += 1.0) {
        const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(outer, a, a + 1.0, 0, 0.0);
        lhs += v;
        quiet = std::fabs(v) < 1e-13 * std::fabs(lhs) ? quiet + 1 : 0;
    }
    auto inner = [&](double r) { return r > 0.0 ? area * h.evaluator(r) * std::pow(r, lambda - 1.0) : 0.0; };
    const double upper = compact ? h.support_radius : 40.0;
    const double rhs = c_n * specfun::riesz_coefficient(dims, lambda) * ts.integrate(inner, 0.0, upper, 1e-13);
    return std::fabs(lhs - rhs) / std::fabs(rhs);
}

// Transform of 1/V_rho(|xi|) at |x| against its closed form, relative residual.
// Closed form: (2 pi)^d Gamma(d/2+rho) / (c_n Gamma(rho)) (1+|x|^2/4)^{-d/2-rho}.
inline double inverse_v_transform(const Dimensions& dims, double rho, double x) {
    RadialProfile p{[rho](double r) { return std::exp(-specfun::log_v_rho(rho, r)); }, 0.0};
    return radial_fourier(dims, p, x).value;
}

inline double inverse_v_transform_closed(const Dimensions& dims, double rho, double x, double c_n) {
    const double d = dims.d();
    return std::pow(2.0 * std::numbers::pi, d) * std::exp(std::lgamma(0.5 * d + rho) - std::lgamma(rho)) / c_n *
           std::pow(1.0 + 0.25 * x * x, -0.5 * d - rho);
}

// ---- kernel of the s-operator in the commutative model ----

namespace detail {

// int_a^inf t^beta G(|t p + 2 q / t|) dt with G the angular kernel of dimension d.
inline QuadratureReport kernel_tail(int d, const Vec& p, const Vec& q, double beta, double a, int max_panels = 70) {
    const double pp = p.squaredNorm(), qq = q.squaredNorm(), pq = p.dot(q);
    auto vnorm = [&](double t) { return std::sqrt(std::max(0.0, t * t * pp + 4.0 * pq + 4.0 * qq / (t * t))); };
    auto f = [&](double t) { return std::pow(t, beta) * angular_kernel(d, vnorm(t)); };
    if (pp == 0.0) {
        if (beta >= -1.0) throw DomainError("kernel integral diverges at a vanishing argument");
        double e = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            f, a, std::numeric_limits<double>::infinity(), 15, 1e-13, &e);
        return {v, e, 61};
    }
    // panel ends at the zeros of the oscillator along the outer monotone branch of |v(t)|
    const auto j = oscillator_zeros(d, max_panels + 40);
    std::vector<double> bounds;
    for (double jk : j) {
        const double b = jk * jk - 4.0 * pq;
        const double disc = b * b - 16.0 * pp * qq;
        if (b <= 0.0 || disc < 0.0) continue;
        const double t = std::sqrt((b + std::sqrt(disc)) / (2.0 * pp));
        if (t <= a * (1.0 + 1e-12) || (!bounds.empty() && t <= bounds.back())) continue;
        bounds.push_back(t);
        if (static_cast<int>(bounds.size()) >= max_panels) break;
    }
    auto rep = panel_sum(f, a, bounds, false);
    if (!std::isfinite(rep.value)) throw ConvergenceError("kernel integral did not converge");
    return rep;
}

inline Vec as_vec(double x) {
    Vec v(1);
    v << x;
    return v;
}

}  // namespace detail

// A^lam(xi, xi') = 2^{d-lam/2} int_0^inf r^{lam-n} G(|r xi + 2 xi'/r|) dr, split at r = 1;
// the piece over (0, 1) is mapped to (2, inf) by r -> 2/r. The range check on lambda is
// left to the caller so that the reflected order 2d - lam can be evaluated too.
inline QuadratureReport kernel_A_unchecked(const Dimensions& dims, double lambda, const Vec& xi, const Vec& xi_prime) {
    const int n = dims.n, d = dims.d();
    if (xi.norm() == 0.0 && xi_prime.norm() == 0.0) throw DomainError("kernel_A needs (xi, xi') != 0");
    const auto tail = detail::kernel_tail(d, xi, xi_prime, lambda - n, 1.0);
    const auto head = detail::kernel_tail(d, xi_prime, xi, n - lambda - 2.0, 2.0);
    const double scale = std::pow(2.0, d - 0.5 * lambda);
    const double hs = std::pow(2.0, lambda - n + 1.0);
    return {scale * (tail.value + hs * head.value), scale * (tail.abs_error_estimate + hs * head.abs_error_estimate),
            tail.nodes_used + head.nodes_used};
}

inline QuadratureReport kernel_A(const Dimensions& dims, double lambda, const Vec& xi, const Vec& xi_prime) {
    if (!(lambda >= 0.0) || !(lambda < dims.d())) throw DomainError("kernel_A needs 0 <= lambda < n-1");
    return kernel_A_unchecked(dims, lambda, xi, xi_prime);
}

inline QuadratureReport kernel_A(const Dimensions& dims, double lambda, double xi, double xi_prime) {
    return kernel_A(dims, lambda, detail::as_vec(xi), detail::as_vec(xi_prime));
}

// Closed form of the n = 2 kernel, 0 <= lam < 1 (regular part only at lam = 0).
inline double kernel_A_closed_n2(double lambda, double xi, double xi_prime) {
    if (!(lambda >= 0.0) || !(lambda < 1.0)) throw DomainError("closed-form kernel needs 0 <= lambda < 1");
    if (xi == 0.0 || xi_prime == 0.0) throw DomainError("closed-form kernel needs nonzero arguments");
    const double z = std::pow(2.0, 1.5) * std::sqrt(std::fabs(xi * xi_prime));
    const double pre = std::pow(2.0, 2.0 - 0.5 * lambda) * std::numbers::pi *
                       std::pow(2.0 * std::fabs(xi_prime / xi), 0.5 * (lambda - 1.0)) /
                       (2.0 * std::cos(0.5 * std::numbers::pi * lambda));
    if (xi * xi_prime > 0.0)
        return pre * (boost::math::cyl_bessel_j(lambda - 1.0, z) - boost::math::cyl_bessel_j(1.0 - lambda, z));
    return pre * 2.0 / std::numbers::pi * std::sin((1.0 - lambda) * std::numbers::pi) *
           boost::math::cyl_bessel_k(1.0 - lambda, z);
}

// ---- Levy-Khinchin representation of log(1 + |gamma|^2/4) ----

// int (e^{i<xi,gamma>} - 1) g(xi) dxi by radial quadrature.
inline QuadratureReport levy_khinchin_rhs(const Dimensions& dims, double gamma_norm) {
    const int d = dims.d();
    const double area = specfun::sphere_area(d);
    auto f = [&](double r) {
        if (r <= 0.0) return 0.0;
        return area * std::pow(r, d - 1) * specfun::levy_density(dims, r) * detail::angular_average_minus_one(d, r * gamma_norm);
    };
    QuadratureReport rep;
    double e = 0.0;
    rep.value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14, &e);
    rep.abs_error_estimate = e;
    rep.nodes_used = 61;
    // exponential decay e^{-2r}: integrate unit panels until negligible
    for (double a = 1.0; a < 40.0; a += 1.0) {
        const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, a + 1.0, 10, 1e-14, &e);
        rep.value += v;
        rep.abs_error_estimate += e;
        rep.nodes_used += 61;
        if (std::fabs(v) < 1e-18 * std::fabs(rep.value)) break;
    }
    return rep;
}

struct LevyKhinchinFit {
    double kappa = 0.0;
    std::vector<double> gammas;
    std::vector<double> residuals;
    double max_residual = 0.0;
};

inline double levy_khinchin_residual(const Dimensions& dims, double gamma_norm, double kappa) {
    if (!(gamma_norm > 0.0)) throw DomainError("levy_khinchin_residual needs gamma != 0");
    const double lhs = std::log1p(0.25 * gamma_norm * gamma_norm);
    return std::fabs(lhs - kappa * levy_khinchin_rhs(dims, gamma_norm).value) / std::fabs(lhs);
}

// Fits the single constant kappa in log(1+|gamma|^2/4) = kappa * RHS over the grid
// (least squares in relative terms) and reports the residual at every point.
inline LevyKhinchinFit levy_khinchin_fit(const Dimensions& dims, const std::vector<double>& gammas) {
    LevyKhinchinFit fit;
    fit.gammas = gammas;
    std::vector<double> lhs, rhs;
    double num = 0.0, den = 0.0;
    for (double g : gammas) {
        lhs.push_back(std::log1p(0.25 * g * g));
        rhs.push_back(levy_khinchin_rhs(dims, g).value);
        const double w = 1.0 / (lhs.back() * lhs.back());
        num += w * lhs.back() * rhs.back();
        den += w * rhs.back() * rhs.back();
    }
    fit.kappa = num / den;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        fit.residuals.push_back(std::fabs(lhs[i] - fit.kappa * rhs[i]) / std::fabs(lhs[i]));
        fit.max_residual = std::max(fit.max_residual, fit.residuals.back());
    }
    return fit;
}

}  // namespace currents::quadrature
