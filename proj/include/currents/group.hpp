#pragma once

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "currents/errors.hpp"
#include "currents/random.hpp"
#include "currents/specfun.hpp"

namespace currents::group {

using Mat = Eigen::MatrixXd;

// (n+1) x (n+1) matrix with block rows/columns of sizes 1, n-1, 1. Vectors gamma are
// row vectors in the formulas; they are stored as Eigen column vectors.
using GroupElement = Mat;

inline int order_of(const GroupElement& g) { return static_cast<int>(g.rows()) - 1; }

inline Mat make_s(const Dimensions& dims) {
    const int n = dims.n;
    Mat s = Mat::Zero(n + 1, n + 1);
    s(0, n) = 1.0;
    s(n, 0) = 1.0;
    for (int i = 1; i < n; ++i) s(i, i) = 1.0;
    return s;
}

inline double membership_residual(const GroupElement& g) {
    const Mat s = make_s(Dimensions(order_of(g)));
    return (g * s * g.transpose() - s).cwiseAbs().maxCoeff();
}

inline GroupElement make_z(const Vec& gamma) {
    const int d = static_cast<int>(gamma.size()), n = d + 1;
    Mat g = Mat::Identity(n + 1, n + 1);
    g.block(1, 0, d, 1) = -gamma;
    g(n, 0) = -0.5 * gamma.squaredNorm();
    g.block(n, 1, 1, d) = gamma.transpose();
    return g;
}

inline bool is_orthogonal(const Mat& u, double tol = 1e-10) {
    return (u * u.transpose() - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline GroupElement make_d(double epsilon, const Mat& u) {
    if (epsilon == 0.0) throw DomainError("make_d needs epsilon != 0");
    if (u.rows() != u.cols() || !is_orthogonal(u)) throw DomainError("make_d needs an orthogonal u");
    const int d = static_cast<int>(u.rows()), n = d + 1;
    Mat g = Mat::Zero(n + 1, n + 1);
    g(0, 0) = 1.0 / epsilon;
    g.block(1, 1, d, d) = u;
    g(n, n) = epsilon;
    return g;
}

inline GroupElement inverse(const GroupElement& g) {
    const Mat s = make_s(Dimensions(order_of(g)));
    return s * g.transpose() * s;
}

namespace detail {

struct Blocks {
    double denom;
    Vec numer;
};

inline Blocks action_blocks(const Vec& gamma, const GroupElement& g) {
    const int n = order_of(g), d = n - 1;
    if (gamma.size() != d) throw DomainError("vector size does not match the group");
    const double h = -0.5 * gamma.squaredNorm();
    Blocks b;
    b.denom = h * g(0, n) + gamma.dot(g.block(1, n, d, 1).col(0)) + g(n, n);
    b.numer = h * g.block(0, 1, 1, d).transpose() + g.block(1, 1, d, d).transpose() * gamma + g.block(n, 1, 1, d).transpose();
    return b;
}

}  // namespace detail

// Boundary action gamma -> gamma g-bar (a right action).
inline Vec act(const Vec& gamma, const GroupElement& g) {
    const auto b = detail::action_blocks(gamma, g);
    if (b.denom == 0.0 || !std::isfinite(b.denom)) throw PointAtInfinity("gamma is sent to the deleted point");
    return b.numer / b.denom;
}

enum class BetaForm {
    last_column,    // |-|g|^2/2 g13 + gamma g23 + g33|: the multiplier of the action
    middle_column,  // Euclidean norm of -|g|^2/2 g12 + gamma g22 + g32; fails the cocycle law
};

inline double cocycle_beta(const Vec& gamma, const GroupElement& g, BetaForm form = BetaForm::last_column) {
    const auto b = detail::action_blocks(gamma, g);
    if (b.denom == 0.0 || !std::isfinite(b.denom)) throw PointAtInfinity("gamma is sent to the deleted point");
    return form == BetaForm::last_column ? std::fabs(b.denom) : b.numer.norm();
}

// diag(-2/|gamma|^2, u_gamma, -|gamma|^2/2) with u_gamma the reflection along gamma.
inline GroupElement d_of_gamma(const Vec& gamma) {
    const double g2 = gamma.squaredNorm();
    if (g2 == 0.0) throw DomainError("d_of_gamma needs gamma != 0");
    const int d = static_cast<int>(gamma.size());
    const Mat u = Mat::Identity(d, d) - 2.0 * gamma * gamma.transpose() / g2;
    return make_d(-0.5 * g2, u);
}

inline Vec j_of_gamma(const Vec& gamma) { return -2.0 * gamma / gamma.squaredNorm(); }

// ---- the triangular subgroup B = Z D and words over B and s ----

struct TriangularElement {
    double epsilon = 1.0;
    Mat u;
    Vec gamma;
};

// (eps, u, gamma) is the matrix z(gamma) d(eps, u).
inline GroupElement to_matrix(const TriangularElement& b) { return make_z(b.gamma) * make_d(b.epsilon, b.u); }

inline TriangularElement compose(const TriangularElement& a, const TriangularElement& b) {
    return {a.epsilon * b.epsilon, a.u * b.u, a.gamma + a.epsilon * (a.u * b.gamma)};
}

inline bool in_triangular(const GroupElement& g, double tol = 1e-12) {
    const int n = order_of(g);
    const double scale = g.cwiseAbs().maxCoeff();
    return std::fabs(g(0, n)) <= tol * scale && g.block(0, 1, 1, n - 1).cwiseAbs().maxCoeff() <= tol * scale;
}

inline TriangularElement triangular_from_matrix(const GroupElement& g) {
    const int n = order_of(g), d = n - 1;
    TriangularElement b;
    b.epsilon = g(n, n);
    b.u = g.block(1, 1, d, d);
    b.gamma = b.u * g.block(n, 1, 1, d).transpose();  // g32 = gamma u
    return b;
}

struct SLetter {};
using Letter = std::variant<TriangularElement, SLetter>;
using GroupWord = std::vector<Letter>;

inline GroupElement evaluate(const GroupWord& w, const Dimensions& dims) {
    GroupElement g = Mat::Identity(dims.n + 1, dims.n + 1);
    const Mat s = make_s(dims);
    for (const auto& l : w) {
        if (std::holds_alternative<SLetter>(l))
            g = g * s;
        else
            g = g * to_matrix(std::get<TriangularElement>(l));
    }
    return g;
}

namespace detail {

inline TriangularElement z_letter(const Vec& gamma) {
    const int d = static_cast<int>(gamma.size());
    return {1.0, Mat::Identity(d, d), gamma};
}

inline bool is_identity(const TriangularElement& b) {
    return b.epsilon == 1.0 && b.gamma.norm() == 0.0 && b.u == Mat::Identity(b.u.rows(), b.u.cols());
}

}  // namespace detail

// Writes g as a word of length <= 5 over B and s: g = h s z(gamma1) with h in B, where
// gamma1 = g12 / g13. When |g13| is small against |g33| the word for s g is used instead
// and prefixed with s.
inline GroupWord factor_word(const GroupElement& g, double tol = 1e-9) {
    const int n = order_of(g), d = n - 1;
    const Dimensions dims(n);
    if (membership_residual(g) > tol * std::max(1.0, g.squaredNorm())) throw DomainError("factor_word: not a group member");
    if (in_triangular(g)) return {triangular_from_matrix(g)};
    GroupWord w;
    GroupElement h = g;
    if (std::fabs(g(n, n)) > std::fabs(g(0, n))) {
        const Mat s = make_s(dims);
        h = s * g;
        w.push_back(SLetter{});
        if (in_triangular(h)) {
            w.push_back(triangular_from_matrix(h));
            return w;
        }
    }
    const Vec gamma1 = h.block(0, 1, 1, d).transpose() / h(0, n);
    const auto b = triangular_from_matrix(h * make_z(-gamma1) * make_s(dims));
    if (!detail::is_identity(b)) w.push_back(b);
    w.push_back(SLetter{});
    if (gamma1.norm() != 0.0) w.push_back(detail::z_letter(gamma1));
    return w;
}

// ---- random members ----

inline Mat random_orthogonal(int d, Engine& eng) {
    boost::random::normal_distribution<double> nd;
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = nd(eng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ();
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

inline TriangularElement random_triangular(int d, Engine& eng) {
    boost::random::normal_distribution<double> nd;
    boost::random::uniform_real_distribution<double> ud(-1.0, 1.0);
    TriangularElement b;
    b.gamma = Vec(d);
    for (int i = 0; i < d; ++i) b.gamma(i) = nd(eng);
    b.epsilon = std::exp(ud(eng)) * (ud(eng) < 0 ? -1.0 : 1.0);
    b.u = random_orthogonal(d, eng);
    return b;
}

// Random word of length 1..max_len in {z(gamma), d(eps, u), s}.
inline GroupElement random_member(const Dimensions& dims, Engine& eng, int max_len = 6) {
    const int d = dims.d();
    boost::random::uniform_int_distribution<int> len(1, max_len), kind(0, 2);
    boost::random::normal_distribution<double> nd;
    boost::random::uniform_real_distribution<double> ud(-1.0, 1.0);
    GroupElement g = Mat::Identity(dims.n + 1, dims.n + 1);
    const int L = len(eng);
    for (int k = 0; k < L; ++k) {
        switch (kind(eng)) {
            case 0: {
                Vec gamma(d);
                for (int i = 0; i < d; ++i) gamma(i) = nd(eng);
                g = g * make_z(gamma);
                break;
            }
            case 1: {
                const double eps = std::exp(ud(eng)) * (ud(eng) < 0 ? -1.0 : 1.0);
                g = g * make_d(eps, random_orthogonal(d, eng));
                break;
            }
            default:
                g = g * make_s(dims);
        }
    }
    return g;
}

// ---- measure relations of the boundary action ----

struct MeasureResiduals {
    double jacobian = 0.0;  // | |det D(act)| - beta^{1-n} | / beta^{1-n}
    double distance = 0.0;  // | |x-y|^2 - |xg - yg|^2 beta(x) beta(y) | / |x-y|^2
};

inline MeasureResiduals measure_relation_check(const GroupElement& g, const Vec& x, const Vec& y) {
    const int d = static_cast<int>(x.size()), n = d + 1;
    Mat jac(d, d);
    // Ridders extrapolation of central differences; a fixed step loses accuracy
    // when x sits close to the point g sends to infinity.
    constexpr int kTab = 24;
    constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink;
    for (int j = 0; j < d; ++j) {
        auto central = [&](double h) {
            Vec xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            return Vec((act(xp, g) - act(xm, g)) / (2.0 * h));
        };
        std::vector<std::vector<Vec>> a(kTab, std::vector<Vec>(kTab));
        // shrink the opening step until it stays clear of the pole
        double h = 0.1 * std::max(1.0, std::fabs(x(j)));
        for (int k = 0; k < 40; ++k) {
            const Vec c1 = central(h), c2 = central(h / 2);
            if ((c1 - c2).norm() <= 0.05 * c2.norm()) break;
            h /= 2;
        }
        a[0][0] = central(h);
        double best_err = std::numeric_limits<double>::infinity();
        Vec best = a[0][0];
        for (int i = 1; i < kTab; ++i) {
            h /= kShrink;
            a[0][i] = central(h);
            double fac = kShrink2;
            for (int k = 1; k <= i; ++k) {
                a[k][i] = (a[k - 1][i] * fac - a[k - 1][i - 1]) / (fac - 1.0);
                fac *= kShrink2;
                const double err = std::max((a[k][i] - a[k - 1][i]).norm(), (a[k][i] - a[k - 1][i - 1]).norm());
                if (err <= best_err) {
                    best_err = err;
                    best = a[k][i];
                }
            }
            if ((a[i][i] - a[i - 1][i - 1]).norm() >= 2.0 * best_err) break;
        }
        jac.col(j) = best;
    }
    MeasureResiduals r;
    const double bx = cocycle_beta(x, g), by = cocycle_beta(y, g);
    const double expect = std::pow(bx, 1 - n);
    r.jacobian = std::fabs(std::fabs(jac.determinant()) - expect) / expect;
    const double lhs = (x - y).squaredNorm();
    r.distance = std::fabs(lhs - (act(x, g) - act(y, g)).squaredNorm() * bx * by) / lhs;
    return r;
}

}  // namespace currents::group
