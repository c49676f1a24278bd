#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "currents/errors.hpp"

namespace currents {

using Vec = Eigen::VectorXd;

struct Dimensions {
    int n;
    explicit Dimensions(int n_) : n(n_) {
        if (n < 2) throw DomainError("n must be >= 2, got " + std::to_string(n));
    }
    int d() const { return n - 1; }
};

namespace specfun {

namespace detail {

// Taylor coefficients c_1..c_28 of 1/Gamma(z) = sum_k c_k z^k.
inline constexpr std::array<double, 28> kRecipGamma = {
    1.0,
    0.577215664901532861,
    -0.655878071520253881,
    -0.0420026350340952355,
    0.16653861138229149,
    -0.0421977345555443367,
    -0.00962197152787697356,
    0.00721894324666309954,
    -0.00116516759185906511,
    -0.000215241674114950973,
    0.000128050282388116186,
    -0.0000201348547807882387,
    -1.25049348214267066e-6,
    1.13302723198169588e-6,
    -2.0563384169776071e-7,
    6.11609510448141582e-9,
    5.00200764446922293e-9,
    -1.18127457048702014e-9,
    1.04342671169110051e-10,
    7.78226343990507125e-12,
    -3.69680561864220571e-12,
    5.10037028745447598e-13,
    -2.05832605356650678e-14,
    -5.34812253942301798e-15,
    1.22677862823826079e-15,
    -1.18125930169745877e-16,
    1.18669225475160033e-18,
    1.41238065531803178e-18,
};

// Temme's auxiliary gammas for |mu| <= 1/2:
// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
struct TemmeGammas {
    double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
    const double m2 = mu * mu;
    double odd = 0.0, even = 0.0;
    for (int j = 13; j >= 0; --j) {
        odd = odd * m2 + kRecipGamma[2 * j + 1];
        even = even * m2 + kRecipGamma[2 * j];
    }
    TemmeGammas t{};
    t.gam1 = -odd;
    t.gam2 = even;
    t.gampl = t.gam2 - mu * t.gam1;
    t.gammi = t.gam2 + mu * t.gam1;
    return t;
}

// e^x K_nu(x) and e^x K_{nu+1}(x), nu >= 0, x > 0.
inline std::pair<double, double> scaled_k_pair(double nu, double x) {
    constexpr double eps = 1e-16;
    constexpr int max_iter = 10000;
    const int nl = static_cast<int>(nu + 0.5);
    const double mu = nu - nl;
    const double mu2 = mu * mu;
    const double xi = 1.0 / x;
    const double xi2 = 2.0 * xi;
    double rkmu = 0.0, rk1 = 0.0;
    if (x < 2.0) {
        const double x2 = 0.5 * x;
        const double pimu = std::numbers::pi * mu;
        const double fact = std::fabs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
        double dd = -std::log(x2);
        double e = mu * dd;
        const double fact2 = std::fabs(e) < eps ? 1.0 : std::sinh(e) / e;
        const auto tg = temme_gammas(mu);
        double ff = fact * (tg.gam1 * std::cosh(e) + tg.gam2 * fact2 * dd);
        double sum = ff;
        e = std::exp(e);
        double p = 0.5 * e / tg.gampl;
        double q = 0.5 / (e * tg.gammi);
        double c = 1.0;
        dd = x2 * x2;
        double sum1 = p;
        int i = 1;
        for (; i <= 400; ++i) {
            ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
            c *= dd / i;
            p /= (i - mu);
            q /= (i + mu);
            const double del = c * ff;
            sum += del;
            const double del1 = c * (p - i * ff);
            sum1 += del1;
            if (std::fabs(del) < std::fabs(sum) * eps) break;
        }
        if (i > 400) throw AccuracyError("K series did not converge");
        const double ex = std::exp(x);
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
    } else {
        double b = 2.0 * (1.0 + x);
        double dd = 1.0 / b;
        double h = dd, delh = dd;
        double q1 = 0.0, q2 = 1.0;
        const double a1 = 0.25 - mu2;
        double q = a1, c = a1;
        double a = -a1;
        double s = 1.0 + q * delh;
        int i = 1;
        for (; i < max_iter; ++i) {
            a -= 2 * i;
            c = -a * c / (i + 1.0);
            const double qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            dd = 1.0 / (b + a * dd);
            delh = (b * dd - 1.0) * delh;
            h += delh;
            const double dels = q * delh;
            s += dels;
            if (std::fabs(dels / s) < eps) break;
        }
        if (i >= max_iter) throw AccuracyError("K continued fraction did not converge");
        h = a1 * h;
        rkmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
        rk1 = rkmu * (mu + x + 0.5 - h) * xi;
    }
    for (int i = 1; i <= nl; ++i) {
        const double next = (mu + i) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
    }
    return {rkmu, rk1};
}

inline double rgamma(double x) {
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x > 170.0) return std::exp(-std::lgamma(x));
    return 1.0 / boost::math::tgamma(x);
}

inline bool is_integer(double x) { return x == std::floor(x); }

// sum_k z^{2k+rho} / (k! Gamma(k+rho+1)), i.e. I_rho(2z), for any rho that is not a
// negative integer (negative integers are folded onto |rho|).
inline double i_series(double rho, double z) {
    if (rho < 0.0 && is_integer(rho)) rho = -rho;
    constexpr int cap = 400;
    const double z2 = z * z;
    double t = std::pow(z, rho) * rgamma(rho + 1.0);
    double sum = t;
    for (int k = 0; k < cap; ++k) {
        const double ratio = z2 / ((k + 1.0) * (k + 1.0 + rho));
        t *= ratio;
        sum += t;
        // Once the ratio of consecutive terms is below 1/2 and falling, the tail is
        // bounded by the last term times 1/(1-ratio) <= 2|t|.
        if (k + 1.0 > z && ratio < 0.5 && 2.0 * std::fabs(t) < 1e-16 * std::fabs(sum)) return sum;
    }
    throw AccuracyError("I series tail above tolerance after 400 terms");
}

// K_m(2z) for integer m >= 0 by the log/digamma limit formula.
inline double k_integer_order(int m, double z) {
    using boost::math::digamma;
    const double z2 = z * z;
    double first = 0.0;
    if (m > 0) {
        double term = std::tgamma(static_cast<double>(m));  // (m-1)!/0!
        double acc = term;
        for (int k = 1; k < m; ++k) {
            term *= -z2 / (static_cast<double>(k) * (m - k));
            acc += term;
        }
        first = 0.5 * std::pow(z, -m) * acc;
    }
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double log_part = -sign * std::log(z) * i_series(m, z);
    double u = 1.0 / std::tgamma(m + 1.0);
    double acc = (digamma(1.0) + digamma(m + 1.0)) * u;
    for (int k = 0; k < 400; ++k) {
        u *= z2 / ((k + 1.0) * (m + k + 1.0));
        const double del = (digamma(k + 2.0) + digamma(m + k + 2.0)) * u;
        acc += del;
        if (k + 1.0 > z && std::fabs(del) < 1e-17 * std::fabs(acc)) {
            return first + log_part + sign * 0.5 * std::pow(z, m) * acc;
        }
    }
    throw AccuracyError("integer-order K series did not converge");
}

}  // namespace detail

// K_nu(x) in the usual argument convention, any real nu, x > 0.
inline double macdonald(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("K_nu(x) needs x > 0");
    const auto [ks, ks1] = detail::scaled_k_pair(std::fabs(nu), x);
    (void)ks1;
    return ks * std::exp(-x);
}

inline double log_macdonald(double nu, double x) {
    if (!(x > 0.0)) throw DomainError("K_nu(x) needs x > 0");
    nu = std::fabs(nu);
    // Leading term only; relative error O(x^2 log x), and avoids overflow of x^-nu.
    if (nu >= 1.0 && x < 1e-10) return std::lgamma(nu) + nu * std::log(2.0 / x) - std::log(2.0);
    return std::log(detail::scaled_k_pair(nu, x).first) - x;
}

// I_rho(2z) by its power series; rho >= 0, 0 < z <= 50.
inline double bessel_i(double rho, double z) {
    if (rho < 0.0) throw DomainError("bessel_i needs rho >= 0");
    if (!(z > 0.0)) throw DomainError("bessel_i needs z > 0");
    if (z > 50.0) throw DomainError("bessel_i series limited to z <= 50");
    return detail::i_series(rho, z);
}

// K_rho(2z); symmetric in rho.
inline double bessel_k(double rho, double z) {
    if (!(z > 0.0)) throw DomainError("bessel_k needs z > 0");
    return macdonald(rho, 2.0 * z);
}

// K_rho(2z) through the reflection formula pi / (2 sin(pi rho)) (I_{-rho} - I_rho),
// with the log/digamma limit near integer orders. Cancels badly for large z; meant for
// small arguments and as a cross-check of bessel_k.
inline double bessel_k_reflection(double rho, double z) {
    if (!(z > 0.0)) throw DomainError("bessel_k needs z > 0");
    rho = std::fabs(rho);
    const double m = std::round(rho);
    if (std::fabs(rho - m) < 1e-6) return detail::k_integer_order(static_cast<int>(m), z);
    return std::numbers::pi / (2.0 * std::sin(std::numbers::pi * rho)) *
           (detail::i_series(-rho, z) - detail::i_series(rho, z));
}

// Leading small-x behaviour of V_rho, three branches in rho.
inline double v_rho_asymptotic(double rho, double x) {
    if (!(rho > 0.0)) throw DomainError("V_rho needs rho > 0");
    if (x < 0.0) throw DomainError("V_rho needs x >= 0");
    if (x == 0.0) return 1.0;
    if (std::fabs(rho - 1.0) < 1e-12) return 1.0 - 2.0 * x * x * std::log(x);
    if (rho < 1.0) return 1.0 + std::pow(x, 2.0 * rho) * std::tgamma(1.0 - rho) / std::tgamma(1.0 + rho);
    return 1.0 + x * x / (rho - 1.0);
}

// log V_rho(x), V_rho(x) = Gamma(rho) / (2 x^rho K_rho(2x)).
inline double log_v_rho(double rho, double x) {
    if (!(rho > 0.0)) throw DomainError("V_rho needs rho > 0");
    if (x < 0.0) throw DomainError("V_rho needs x >= 0");
    if (x == 0.0) return 0.0;
    // for rho >= 1 the leading small-x term is exact to O(x^2 log x); below 1 the next
    // correction is only O(x^{4 rho}), so those orders stay on the direct formula
    if (rho >= 1.0 && x < 1e-8) return std::log1p(v_rho_asymptotic(rho, x) - 1.0);
    const double ks = detail::scaled_k_pair(rho, 2.0 * x).first;
    return std::lgamma(rho) - std::log(2.0) - rho * std::log(x) - std::log(ks) + 2.0 * x;
}

inline double v_rho(double rho, double x) {
    if (!(rho > 0.0)) throw DomainError("V_rho needs rho > 0");
    if (x < 0.0) throw DomainError("V_rho needs x >= 0");
    if (x == 0.0) return 1.0;
    if (x > 300.0 || (rho >= 1.0 && x < 1e-8)) return std::exp(log_v_rho(rho, x));
    const double ks = detail::scaled_k_pair(rho, 2.0 * x).first;
    return std::tgamma(rho) * std::exp(2.0 * x) / (2.0 * std::pow(x, rho) * ks);
}

inline double sphere_area(int d) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// Radial Levy density r^{-d/2} K_{d/2}(2r).
inline double levy_density(const Dimensions& dims, double r) {
    if (!(r > 0.0)) throw DomainError("levy density is singular at 0");
    const double h = 0.5 * dims.d();
    return std::pow(r, -h) * macdonald(h, 2.0 * r);
}

inline double levy_density(const Dimensions& dims, const Vec& xi) { return levy_density(dims, xi.norm()); }

// log of the single-cell marginal density at radius r (normalized to total mass 1).
inline double log_marginal_radial_density(const Dimensions& dims, double lambda, double r) {
    if (!(lambda > 0.0)) throw DomainError("marginal density needs lambda > 0");
    if (!(r > 0.0)) throw DomainError("marginal density evaluated at 0");
    const double d = dims.d();
    return std::log(2.0) - std::lgamma(0.5 * lambda) - 0.5 * d * std::log(std::numbers::pi) +
           0.5 * (lambda - d) * std::log(r) + log_macdonald(0.5 * (d - lambda), 2.0 * r);
}

inline double marginal_radial_density(const Dimensions& dims, double lambda, double r) {
    return std::exp(log_marginal_radial_density(dims, lambda, r));
}

inline double marginal_radial_density(const Dimensions& dims, double lambda, const Vec& xi) {
    return marginal_radial_density(dims, lambda, xi.norm());
}

// 2^{-lambda} Gamma((d-lambda)/2) / Gamma(lambda/2); needs 0 < lambda < d.
inline double riesz_coefficient(const Dimensions& dims, double lambda) {
    const double d = dims.d();
    if (!(lambda > 0.0) || !(lambda < d)) throw DomainError("riesz coefficient needs 0 < lambda < n-1");
    return std::pow(2.0, -lambda) * std::tgamma(0.5 * (d - lambda)) / std::tgamma(0.5 * lambda);
}

}  // namespace specfun
}  // namespace currents
