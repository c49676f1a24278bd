#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "currents/errors.hpp"
#include "currents/measures.hpp"
#include "currents/quadrature.hpp"
#include "currents/random.hpp"
#include "currents/specfun.hpp"

namespace currents::process {

// Gamma variates use boost::random::gamma_distribution (Marsaglia-Tsang for shape >= 1,
// boosted by U^{1/shape} below 1); normals use boost's ziggurat. Both are plain code over
// the engine, so output depends only on the stream.

inline Vec gaussian_vector(int d, double variance, Engine& eng) {
    boost::random::normal_distribution<double> nd(0.0, std::sqrt(variance));
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = nd(eng);
    return v;
}

struct MixtureDraw {
    double w;
    Vec xi;
};

// W ~ Gamma(lam/2, 1), xi | W ~ N(0, (W/2) I).
inline MixtureDraw sample_cell(const Dimensions& dims, double lam, Engine& eng) {
    if (!(lam > 0.0)) throw DomainError("cell mass must be positive");
    boost::random::gamma_distribution<double> gd(0.5 * lam, 1.0);
    const double w = gd(eng);
    return {w, gaussian_vector(dims.d(), 0.5 * w, eng)};
}

inline MarginalVector sample_marginal(const Dimensions& dims, const Partition& p, Engine& eng) {
    MarginalVector out;
    out.reserve(p.size());
    for (double lam : p.masses) out.push_back(sample_cell(dims, lam, eng).xi);
    return out;
}

// Difference of two Gamma(lam/2, scale 1/2) variables; single-cell law for n = 2.
inline double oracle_n2(double lam, Engine& eng) {
    if (!(lam > 0.0)) throw DomainError("oracle_n2 needs lam > 0");
    boost::random::gamma_distribution<double> gd(0.5 * lam, 0.5);
    const double a = gd(eng);
    return a - gd(eng);
}

// ---- Kolmogorov-Smirnov ----

inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double worst = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        worst = std::max(worst, std::fabs(i / na - j / nb));
    }
    return worst;
}

// cdf must accept the sorted sample and return the CDF at every point.
inline double ks_one_sample(std::vector<double> xs, const std::function<std::vector<double>(const std::vector<double>&)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const auto f = cdf(xs);
    const double n = static_cast<double>(xs.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max({worst, f[i] - i / n, (i + 1) / n - f[i]});
    return worst;
}

// CDF of the n = 2 single-cell law at sorted points, by quadrature of the density
// between consecutive points. The density behaves like r^{lam-1} at 0; for lam < 1 the
// substitution r = t^{1/lam} makes the integrand bounded.
inline std::vector<double> marginal_cdf_n2(double lam, const std::vector<double>& sorted) {
    const Dimensions dims(2);
    const double p = lam < 1.0 ? 1.0 / lam : 1.0;
    auto g = [&](double t) {
        if (t <= 0.0) return p == 1.0 ? specfun::marginal_radial_density(dims, lam, 1e-300) : 0.0;
        const double r = std::pow(t, p);
        if (r < 1e-300) return 0.0;
        return specfun::marginal_radial_density(dims, lam, r) * p * r / t;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    auto piece = [&](double a, double b) {  // 0 <= a <= b, in r
        if (b <= a) return 0.0;
        const double ta = std::pow(a, 1.0 / p), tb = std::pow(b, 1.0 / p);
        if (a == 0.0) return ts.integrate(g, 0.0, tb);
        return boost::math::quadrature::gauss<double, 7>::integrate(g, ta, tb);
    };
    std::vector<double> out(sorted.size());
    // nonnegative points: walk outward from 0
    double acc = 0.5, prev = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0.0) continue;
        acc += piece(prev, sorted[i]);
        prev = sorted[i];
        out[i] = acc;
    }
    acc = 0.5;
    prev = 0.0;
    for (std::size_t i = sorted.size(); i-- > 0;) {
        if (sorted[i] >= 0.0) continue;
        acc -= piece(prev, -sorted[i]);
        prev = -sorted[i];
        out[i] = acc;
    }
    return out;
}

// ---- empirical characteristic functions ----

struct McEstimate {
    double mean = 0.0;  // real part; the imaginary part vanishes by symmetry
    double imag = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

inline McEstimate mc_mean(const std::vector<double>& re, const std::vector<double>& im = {}) {
    McEstimate e;
    e.samples = re.size();
    const double n = static_cast<double>(re.size());
    double s = 0.0, s2 = 0.0;
    for (double v : re) {
        s += v;
        s2 += v * v;
    }
    e.mean = s / n;
    e.std_error = std::sqrt(std::max(0.0, s2 / n - e.mean * e.mean) / std::max(1.0, n - 1.0));
    for (double v : im) e.imag += v / n;
    return e;
}

inline double pairing(const MarginalVector& xi, const CellVector& gamma) {
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) s += xi[i].dot(gamma.at(i));
    return s;
}

// ---- coherence of the mu family under a refinement ----

struct CoherenceReport {
    double nu_exact_residual = 0.0;
    double mc_value = 0.0;
    double mc_std_error = 0.0;
    double target = 0.0;   // big_psi over the parent partition
    double z_score = 0.0;  // |mc - target| / se
};

// Samples under the child partition, sums cell groups and compares the empirical
// characteristic function at gamma with big_psi over the parent.
inline CoherenceReport check_coherence(const Dimensions& dims, const measures::Refinement& r, const CellVector& gamma,
                                       std::size_t samples, Engine& eng) {
    CoherenceReport rep;
    bool nu_ok = true;
    for (double lam : r.child.masses) nu_ok = nu_ok && lam < dims.d();
    for (double lam : r.parent.masses) nu_ok = nu_ok && lam < dims.d();
    bool nonzero = true;
    for (const auto& g : gamma) nonzero = nonzero && g.norm() > 0.0;
    if (nu_ok && nonzero) rep.nu_exact_residual = measures::nu_coherence_residual(r, gamma);
    std::vector<double> re(samples), im(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto down = measures::push_down(r, sample_marginal(dims, r.child, eng));
        const double t = pairing(down, gamma);
        re[k] = std::cos(t);
        im[k] = std::sin(t);
    }
    const auto e = mc_mean(re, im);
    rep.mc_value = e.mean;
    rep.mc_std_error = e.std_error;
    rep.target = measures::big_psi(r.parent, gamma);
    rep.z_score = rep.mc_std_error > 0.0 ? std::fabs(rep.mc_value - rep.target) / rep.mc_std_error
                                        : (rep.mc_value == rep.target ? 0.0 : INFINITY);
    return rep;
}

// ---- jump process ----

inline double default_kappa(const Dimensions& dims) { return -2.0 * std::pow(std::numbers::pi, -0.5 * dims.d()); }

// Radial jump intensity (-kappa/2) |S^{d-1}| r^{d-1} g(r), in log form.
inline double log_radial_intensity(const Dimensions& dims, double kappa, double r) {
    const double d = dims.d();
    return std::log(-0.5 * kappa) + std::log(specfun::sphere_area(dims.d())) + (d - 1.0) * std::log(r) - 0.5 * d * std::log(r) +
           specfun::log_macdonald(0.5 * d, 2.0 * r);
}

inline double radial_intensity(const Dimensions& dims, double kappa, double r) {
    return std::exp(log_radial_intensity(dims, kappa, r));
}

// m int_{|xi|<eps} |xi| intensity
inline double truncation_bound(const Dimensions& dims, double kappa, double total_mass, double eps) {
    auto f = [&](double r) { return r < 1e-300 ? 0.0 : r * radial_intensity(dims, kappa, r); };
    return total_mass * boost::math::quadrature::tanh_sinh<double>().integrate(f, 0.0, eps);
}

// m int_{|xi|>=eps} (e^{i<xi,gamma>} - 1) intensity, for |gamma| = gamma_norm.
inline double truncated_exponent(const Dimensions& dims, double kappa, double total_mass, double eps, double gamma_norm) {
    const int d = dims.d();
    auto f = [&](double r) { return radial_intensity(dims, kappa, r) * quadrature::detail::angular_average_minus_one(d, r * gamma_norm); };
    double s = 0.0;
    // log-spaced panels up to 1, then unit panels
    for (double a = eps; a < 1.0; a *= 4.0) s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, std::min(1.0, 4.0 * a), 10, 1e-13);
    for (double a = std::max(1.0, eps); a < 40.0; a += 1.0) s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, a + 1.0, 10, 1e-13);
    return total_mass * s;
}

// Tail integral Lambda(r) = int_r^inf radial intensity, tabulated on a log grid over
// [eps, r_max] and inverted by linear interpolation in (log r, log Lambda).
class JumpSampler {
public:
    JumpSampler(const Dimensions& dims, double eps, double kappa, int nodes = 2000, double r_max = 30.0)
        : dims_(dims), eps_(eps), kappa_(kappa) {
        if (!(eps > 0.0) || !(eps < r_max)) throw DomainError("cutoff must be in (0, r_max)");
        if (!(kappa < 0.0)) throw DomainError("kappa must be negative");
        log_r_.resize(nodes);
        log_tail_.resize(nodes);
        const double a = std::log(eps), b = std::log(r_max);
        for (int i = 0; i < nodes; ++i) log_r_[i] = a + (b - a) * i / (nodes - 1);
        auto f = [&](double t) { return std::exp(log_radial_intensity(dims_, kappa_, std::exp(t)) + t); };
        // tail beyond r_max
        auto g = [&](double r) { return radial_intensity(dims_, kappa_, r); };
        double acc = boost::math::quadrature::exp_sinh<double>().integrate(g, r_max, std::numeric_limits<double>::infinity());
        acc = std::max(acc, std::numeric_limits<double>::min());
        log_tail_[nodes - 1] = std::log(acc);
        for (int i = nodes - 2; i >= 0; --i) {
            acc += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, log_r_[i], log_r_[i + 1], 0, 0.0);
            log_tail_[i] = std::log(acc);
        }
    }

    double eps() const { return eps_; }
    double kappa() const { return kappa_; }
    // Lambda(eps): expected number of jumps per unit mass
    double rate() const { return std::exp(log_tail_.front()); }

    // exact up to the table: node value plus the piece from r to the next node
    double tail(double r) const {
        if (r <= eps_) return rate();
        const auto it = std::upper_bound(log_r_.begin(), log_r_.end(), std::log(r));
        if (it == log_r_.end()) return std::exp(log_tail_.back());
        const auto i = static_cast<std::size_t>(it - log_r_.begin());
        auto f = [&](double t) { return std::exp(log_radial_intensity(dims_, kappa_, std::exp(t)) + t); };
        return std::exp(log_tail_[i]) + boost::math::quadrature::gauss<double, 15>::integrate(f, std::log(r), log_r_[i]);
    }

    // radius with Lambda(radius) = u Lambda(eps), u in (0, 1]: table interpolation in
    // (log r, log Lambda) followed by one Newton step in log r
    double radius(double u) const {
        const double target = std::log(u) + log_tail_.front();
        if (target <= log_tail_.back()) return std::exp(log_r_.back());
        // log_tail_ is decreasing
        const auto it = std::lower_bound(log_tail_.begin(), log_tail_.end(), target, [](double a, double b) { return a > b; });
        const auto i = static_cast<std::size_t>(it - log_tail_.begin());
        if (i == 0) return eps_;
        const double t = (target - log_tail_[i - 1]) / (log_tail_[i] - log_tail_[i - 1]);
        const double r = std::exp(log_r_[i - 1] + t * (log_r_[i] - log_r_[i - 1]));
        const double lt = tail(r);
        const double slope = r * radial_intensity(dims_, kappa_, r) / lt;  // -d log Lambda / d log r
        return std::clamp(r * std::exp((std::log(lt) - target) / slope), std::exp(log_r_[i - 1]), std::exp(log_r_[i]));
    }

    Vec direction(Engine& eng) const {
        const int d = dims_.d();
        if (d == 1) {
            boost::random::uniform_01<double> u;
            return Vec::Constant(1, u(eng) < 0.5 ? -1.0 : 1.0);
        }
        Vec v;
        do v = gaussian_vector(d, 1.0, eng);
        while (v.norm() == 0.0);
        return v / v.norm();
    }

    PointConfiguration sample(double total_mass, Engine& eng) const {
        if (!(total_mass > 0.0)) throw DomainError("total mass must be positive");
        boost::random::poisson_distribution<long long, double> pd(total_mass * rate());
        boost::random::uniform_01<double> u01;
        boost::random::uniform_real_distribution<double> loc(0.0, total_mass);
        const long long count = pd(eng);
        PointConfiguration c;
        c.atoms.reserve(static_cast<std::size_t>(count));
        std::vector<double> used;
        for (long long k = 0; k < count; ++k) {
            double x;
            do x = loc(eng);
            while (std::find(used.begin(), used.end(), x) != used.end());
            used.push_back(x);
            double u;
            do u = u01(eng);
            while (u == 0.0);
            c.atoms.push_back({x, radius(u) * direction(eng)});
        }
        std::sort(c.atoms.begin(), c.atoms.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
        c.truncation_bound = truncation_bound(dims_, kappa_, total_mass, eps_);
        return c;
    }

private:
    Dimensions dims_;
    double eps_, kappa_;
    std::vector<double> log_r_, log_tail_;
};

inline PointConfiguration sample_process(const Dimensions& dims, double total_mass, double cutoff_eps, Engine& eng,
                                         double kappa = NAN) {
    return JumpSampler(dims, cutoff_eps, std::isnan(kappa) ? default_kappa(dims) : kappa).sample(total_mass, eng);
}

inline MarginalVector project_config(const PointConfiguration& config, const Partition& p, int d) {
    for (const auto& a : config.atoms)
        if (a.x < 0.0 || a.x > p.total()) throw DomainError("atom outside [0, total mass]");
    if (config.atoms.empty()) return MarginalVector(p.size(), Vec::Zero(d));
    return measures::project(config, p);
}

// c^i -> c^i u (row-vector convention)
inline PointConfiguration rotate_config(const PointConfiguration& config, const Eigen::MatrixXd& u) {
    PointConfiguration out = config;
    for (auto& a : out.atoms) a.c = u.transpose() * a.c;
    return out;
}

inline PointConfiguration scale_config(const PointConfiguration& config, const std::function<double(double)>& eps) {
    PointConfiguration out = config;
    for (auto& a : out.atoms) {
        const double e = eps(a.x);
        if (e == 0.0) throw DomainError("scale factor must be nonzero");
        a.c *= e;
    }
    return out;
}

}  // namespace currents::process
