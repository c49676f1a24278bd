#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "currents/errors.hpp"
#include "currents/specfun.hpp"

namespace currents {

// Finite partition of X = [0, total_mass] into consecutive intervals; only the masses
// matter.
struct Partition {
    std::vector<double> masses;

    Partition() = default;
    explicit Partition(std::vector<double> m) : masses(std::move(m)) {
        if (masses.empty()) throw ConfigError("partition needs at least one cell");
        for (double x : masses)
            if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("partition masses must be positive");
    }

    std::size_t size() const { return masses.size(); }
    double total() const {
        double t = 0.0;
        for (double x : masses) t += x;
        return t;
    }
    // left end of cell i in [0, total]
    double left(std::size_t i) const {
        double t = 0.0;
        for (std::size_t k = 0; k < i; ++k) t += masses[k];
        return t;
    }

    static Partition parse(const std::string& text) {
        if (text.empty() || text.back() == ',') throw ConfigError("bad partition '" + text + "'");
        std::vector<double> m;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                m.push_back(std::stod(item, &used));
                if (used != item.size()) throw ConfigError("bad partition entry '" + item + "'");
            } catch (const std::logic_error&) {
                throw ConfigError("bad partition entry '" + item + "'");
            }
        }
        return Partition(std::move(m));
    }
};

// Per-cell vectors (gamma^i or xi^i) aligned with a partition.
using CellVector = std::vector<Vec>;
using MarginalVector = std::vector<Vec>;

// Finite sum of vector point masses c^i delta_{x_i}.
struct PointConfiguration {
    struct Atom {
        double x;
        Vec c;
    };
    std::vector<Atom> atoms;
    double truncation_bound = 0.0;
};

namespace measures {

inline void require_aligned(const Partition& p, const std::vector<Vec>& v) {
    if (p.size() != v.size()) throw ConfigError("cell vector length does not match the partition");
}

inline void require_nu_masses(const Dimensions& dims, const Partition& p) {
    for (double lam : p.masses)
        if (!(lam < dims.d())) throw DomainError("nu needs every cell mass below n-1");
}

inline double char_l(const Vec& gamma) { return 1.0 / std::sqrt(1.0 + 0.25 * gamma.squaredNorm()); }

inline double log_big_psi(const Partition& p, const CellVector& gamma) {
    require_aligned(p, gamma);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += -0.5 * p.masses[i] * std::log1p(0.25 * gamma[i].squaredNorm());
    return s;
}

inline double big_psi(const Partition& p, const CellVector& gamma) { return std::exp(log_big_psi(p, gamma)); }

inline double log_mu_density(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    require_aligned(p, xi);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = xi[i].norm();
        if (r == 0.0) throw DomainError("mu density evaluated at xi^i = 0");
        s += specfun::log_marginal_radial_density(dims, p.masses[i], r);
    }
    return s;
}

inline double mu_alpha_density(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    return std::exp(log_mu_density(dims, p, xi));
}

// Single-cell nu density pi^{-d/2} C_lam |xi|^{lam-d}.
inline double log_nu_cell(const Dimensions& dims, double lam, double r) {
    const double d = dims.d();
    return -0.5 * d * std::log(std::numbers::pi) + std::log(specfun::riesz_coefficient(dims, lam)) + (lam - d) * std::log(r);
}

inline double log_nu_density(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    require_aligned(p, xi);
    require_nu_masses(dims, p);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = xi[i].norm();
        if (r == 0.0) throw DomainError("nu density evaluated at xi^i = 0");
        s += log_nu_cell(dims, p.masses[i], r);
    }
    return s;
}

inline double nu_alpha_density(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    return std::exp(log_nu_density(dims, p, xi));
}

// d nu_alpha / d mu_alpha = 2^{-m} prod V_{(d-lam_k)/2}(|xi^k|).
inline double log_rn_derivative(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    require_aligned(p, xi);
    require_nu_masses(dims, p);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += -p.masses[i] * std::log(2.0) + specfun::log_v_rho(0.5 * (dims.d() - p.masses[i]), xi[i].norm());
    return s;
}

inline double rn_derivative(const Dimensions& dims, const Partition& p, const MarginalVector& xi) {
    return std::exp(log_rn_derivative(dims, p, xi));
}

// v(sum c^i delta_{x_i}) = 2^{-m(X)} prod V_{d/2}(|c^i|), accumulated in log-space.
inline double log_density_v(const Dimensions& dims, const PointConfiguration& config, double total_mass) {
    double s = -total_mass * std::log(2.0);
    for (const auto& a : config.atoms) s += specfun::log_v_rho(0.5 * dims.d(), a.c.norm());
    return s;
}

inline double density_v(const Dimensions& dims, const PointConfiguration& config, double total_mass) {
    return std::exp(log_density_v(dims, config, total_mass));
}

// Fourier transform of nu_alpha: prod |gamma^i|^{-lam_i}.
inline double log_nu_char(const Partition& p, const CellVector& gamma) {
    require_aligned(p, gamma);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double r = gamma[i].norm();
        if (r == 0.0) throw DomainError("nu_char needs nonzero cell vectors");
        s -= p.masses[i] * std::log(r);
    }
    return s;
}

inline double nu_char(const Partition& p, const CellVector& gamma) { return std::exp(log_nu_char(p, gamma)); }

// ---- refinements ----

struct Refinement {
    Partition parent, child;
    std::vector<std::size_t> assignment;  // child cell -> parent cell
};

// Splits every cell of the parent into `ways` equal cells.
inline Refinement split_evenly(const Partition& parent, int ways) {
    Refinement r;
    r.parent = parent;
    std::vector<double> m;
    for (std::size_t i = 0; i < parent.size(); ++i)
        for (int k = 0; k < ways; ++k) {
            m.push_back(parent.masses[i] / ways);
            r.assignment.push_back(i);
        }
    r.child = Partition(std::move(m));
    return r;
}

// Splits one cell into the given masses, leaving the others alone.
inline Refinement split_cell(const Partition& parent, std::size_t cell, const std::vector<double>& pieces) {
    Refinement r;
    r.parent = parent;
    std::vector<double> m;
    double sum = 0.0;
    for (double x : pieces) sum += x;
    if (std::fabs(sum - parent.masses.at(cell)) > 1e-12 * parent.masses[cell]) throw ConfigError("pieces must add up to the cell mass");
    for (std::size_t i = 0; i < parent.size(); ++i) {
        if (i == cell) {
            for (double x : pieces) {
                m.push_back(x);
                r.assignment.push_back(i);
            }
        } else {
            m.push_back(parent.masses[i]);
            r.assignment.push_back(i);
        }
    }
    r.child = Partition(std::move(m));
    return r;
}

inline Refinement chain(const Refinement& ab, const Refinement& bc) {
    Refinement r;
    r.parent = ab.parent;
    r.child = bc.child;
    for (std::size_t k : bc.assignment) r.assignment.push_back(ab.assignment.at(k));
    return r;
}

inline double mass_conservation_residual(const Refinement& r) {
    std::vector<double> sums(r.parent.size(), 0.0);
    for (std::size_t j = 0; j < r.child.size(); ++j) sums.at(r.assignment.at(j)) += r.child.masses[j];
    double worst = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) worst = std::max(worst, std::fabs(sums[i] - r.parent.masses[i]));
    return worst;
}

// gamma constant on parent cells, written over the child cells.
inline CellVector lift(const Refinement& r, const CellVector& gamma) {
    require_aligned(r.parent, gamma);
    CellVector out;
    for (std::size_t k : r.assignment) out.push_back(gamma.at(k));
    return out;
}

// xi^i summed over the child cells of each parent cell.
inline MarginalVector push_down(const Refinement& r, const MarginalVector& xi) {
    require_aligned(r.child, xi);
    MarginalVector out(r.parent.size(), Vec::Zero(xi.front().size()));
    for (std::size_t j = 0; j < xi.size(); ++j) out[r.assignment[j]] += xi[j];
    return out;
}

// Exact coherence of the nu transforms: relative difference of nu_char over parent and child.
inline double nu_coherence_residual(const Refinement& r, const CellVector& gamma) {
    const double a = log_nu_char(r.parent, gamma), b = log_nu_char(r.child, lift(r, gamma));
    return std::fabs(std::expm1(b - a));
}

// ---- invariance at density level ----

// nu(eps xi) |eps|^{d} per cell against prod |eps_i|^{lam_i} nu(xi): relative residual.
inline double nu_scaling_residual(const Dimensions& dims, const Partition& p, const MarginalVector& xi,
                                  const std::vector<double>& eps) {
    MarginalVector scaled;
    double log_jac = 0.0, log_weight = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        scaled.push_back(eps.at(i) * xi[i]);
        log_jac += dims.d() * std::log(std::fabs(eps[i]));
        log_weight += p.masses[i] * std::log(std::fabs(eps[i]));
    }
    return std::fabs(std::expm1(log_nu_density(dims, p, scaled) + log_jac - log_weight - log_nu_density(dims, p, xi)));
}

inline double nu_rotation_residual(const Dimensions& dims, const Partition& p, const MarginalVector& xi,
                                   const std::vector<Eigen::MatrixXd>& u) {
    MarginalVector rotated;
    for (std::size_t i = 0; i < p.size(); ++i) rotated.push_back(u.at(i).transpose() * xi[i]);
    return std::fabs(std::expm1(log_nu_density(dims, p, rotated) - log_nu_density(dims, p, xi)));
}

// Smallest eigenvalue of the Gram matrix [l(gamma_i - gamma_j)].
inline double char_l_gram_min_eigenvalue(const std::vector<Vec>& pts) {
    const auto k = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd g(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) g(i, j) = char_l(pts[i] - pts[j]);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
}

// ---- limit of d nu_alpha / d mu_alpha along refinements ----

inline MarginalVector project(const PointConfiguration& config, const Partition& p) {
    const int d = config.atoms.empty() ? 0 : static_cast<int>(config.atoms.front().c.size());
    MarginalVector out(p.size(), Vec::Zero(d));
    for (const auto& a : config.atoms) {
        double left = 0.0;
        std::size_t i = 0;
        while (i + 1 < p.size() && a.x >= left + p.masses[i]) left += p.masses[i++];
        out[i] += a.c;
    }
    return out;
}

struct RefinementLimit {
    std::vector<double> cell_mass;
    std::vector<double> log_values;  // log d nu_alpha / d mu_alpha at the projected configuration
    double log_target = 0.0;         // log density_v
    double log_richardson = 0.0;     // extrapolation of the last two levels (error linear in cell mass)
    double final_relative_error = 0.0;
    double richardson_relative_error = 0.0;
};

// Evaluates the Radon-Nikodym derivative on uniform partitions with start_cells cells,
// refined `levels` times by splitting every cell into `ways`. Empty cells contribute
// 2^{-lam} V(0) = 2^{-lam}.
inline RefinementLimit refinement_limit(const Dimensions& dims, const PointConfiguration& config, double total_mass,
                                        int start_cells = 2, int ways = 8, int levels = 4) {
    RefinementLimit out;
    out.log_target = log_density_v(dims, config, total_mass);
    Partition p(std::vector<double>(start_cells, total_mass / start_cells));
    for (int level = 0; level <= levels; ++level) {
        MarginalVector xi = project(config, p);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double lam = p.masses[i];
            if (!(lam < dims.d())) throw DomainError("refinement cells must have mass below n-1");
            s += -lam * std::log(2.0) + specfun::log_v_rho(0.5 * (dims.d() - lam), xi[i].norm());
        }
        out.cell_mass.push_back(p.masses.front());
        out.log_values.push_back(s);
        if (level < levels) p = split_evenly(p, ways).child;
    }
    const std::size_t k = out.log_values.size();
    out.log_richardson = k >= 2 ? (ways * out.log_values[k - 1] - out.log_values[k - 2]) / (ways - 1) : out.log_values.back();
    out.final_relative_error = std::fabs(std::expm1(out.log_values.back() - out.log_target));
    out.richardson_relative_error = std::fabs(std::expm1(out.log_richardson - out.log_target));
    return out;
}

}  // namespace measures
}  // namespace currents
