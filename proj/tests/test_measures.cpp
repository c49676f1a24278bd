#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "currents/group.hpp"
#include "currents/measures.hpp"

using namespace currents;
using namespace currents::measures;

namespace {

const double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vec random_vec(int d, Engine& eng, double scale = 1.0) {
    boost::random::normal_distribution<double> nd(0.0, scale);
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = nd(eng);
    return v;
}

PointConfiguration atoms(const std::vector<std::pair<double, Vec>>& xs) {
    PointConfiguration c;
    for (const auto& [x, v] : xs) c.atoms.push_back({x, v});
    return c;
}

}  // namespace

TEST(Partition, ParseAndValidate) {
    const auto p = Partition::parse("0.5,0.25,1");
    ASSERT_EQ(p.size(), 3u);
    EXPECT_DOUBLE_EQ(p.total(), 1.75);
    EXPECT_DOUBLE_EQ(p.left(2), 0.75);
    EXPECT_THROW(Partition::parse("0.5,-1"), ConfigError);
    EXPECT_THROW(Partition::parse("0.5,x"), ConfigError);
    EXPECT_THROW(Partition::parse("0.5,"), ConfigError);
    EXPECT_THROW(Partition(std::vector<double>{}), ConfigError);
}

TEST(CharL, Values) {
    EXPECT_EQ(char_l(vec({0.0, 0.0})), 1.0);
    EXPECT_NEAR(char_l(vec({1.2, 1.6})), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(char_l(vec({1.2, 1.6})), char_l(vec({2.0, 0.0})), 1e-15);
}

TEST(CharL, GramMatrixIsPositiveSemidefinite) {
    Engine eng = make_engine({21, 0});
    for (int d : {1, 2}) {
        std::vector<Vec> pts;
        for (int k = 0; k < 20; ++k) pts.push_back(random_vec(d, eng, 2.0));
        EXPECT_GE(char_l_gram_min_eigenvalue(pts), -1e-10);
    }
}

TEST(BigPsi, ValuesAndRefinementInvariance) {
    const Partition one({1.0});
    EXPECT_NEAR(big_psi(one, {vec({2.0})}), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(big_psi(Partition({0.3, 0.7}), {vec({0.0}), vec({0.0})}), 1.0);
    const Partition a({0.6, 0.9});
    const CellVector g{vec({0.4, 1.0}), vec({-2.0, 0.3})};
    const auto r = split_evenly(a, 3);
    EXPECT_NEAR(big_psi(r.child, lift(r, g)) / big_psi(a, g), 1.0, 1e-14);
    EXPECT_THROW(big_psi(a, {vec({1.0, 0.0})}), ConfigError);
}

TEST(MuDensity, SingleCellValueAndNormalization) {
    const Dimensions dims(2);
    // (2/pi) K_0(1) for lam = 1
    const double expect = 2.0 / kPi * boost::math::cyl_bessel_k(0, 1.0);
    EXPECT_NEAR(mu_alpha_density(dims, Partition({1.0}), {vec({0.5})}), expect, 1e-14);
    EXPECT_NEAR(expect, 0.268032, 1e-6);
    // total mass over the line and over the plane
    for (double lam : {0.5, 1.0, 1.7}) {
        auto f = [&](double r) { return r < 1e-150 ? 0.0 : 2.0 * mu_alpha_density(dims, Partition({lam}), {vec({r})}); };
        const double total = boost::math::quadrature::tanh_sinh<double>().integrate(f, 0.0, 1.0) +
                             boost::math::quadrature::exp_sinh<double>().integrate(f, 1.0, std::numeric_limits<double>::infinity());
        EXPECT_NEAR(total, 1.0, 1e-8) << lam;
    }
    const Dimensions d3(3);
    auto f3 = [&](double r) { return r < 1e-150 ? 0.0 : 2 * kPi * r * mu_alpha_density(d3, Partition({0.8}), {vec({r, 0.0})}); };
    const double total3 = boost::math::quadrature::tanh_sinh<double>().integrate(f3, 0.0, 1.0) +
                          boost::math::quadrature::exp_sinh<double>().integrate(f3, 1.0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(total3, 1.0, 1e-8);
}

TEST(MuDensity, FactorizesOverCellsAndIsRotationInvariant) {
    const Dimensions dims(3);
    const Partition p({0.4, 1.3});
    const MarginalVector xi{vec({0.3, -0.2}), vec({1.0, 0.5})};
    const double prod = mu_alpha_density(dims, Partition({0.4}), {xi[0]}) * mu_alpha_density(dims, Partition({1.3}), {xi[1]});
    EXPECT_NEAR(mu_alpha_density(dims, p, xi) / prod, 1.0, 1e-14);
    Engine eng = make_engine({22, 0});
    const auto u = group::random_orthogonal(2, eng);
    const MarginalVector rot{u * xi[0], u * xi[1]};
    EXPECT_NEAR(log_mu_density(dims, p, rot), log_mu_density(dims, p, xi), 1e-13);
    EXPECT_THROW(mu_alpha_density(dims, p, {vec({0.0, 0.0}), xi[1]}), DomainError);
}

TEST(NuDensity, SingleCellValue) {
    // 2^{-1/2} Gamma(1/4)/Gamma(1/4) times pi^{-1/2}
    EXPECT_NEAR(nu_alpha_density(Dimensions(2), Partition({0.5}), {vec({1.0})}), std::sqrt(0.5) / std::sqrt(kPi), 1e-14);
    EXPECT_THROW(nu_alpha_density(Dimensions(2), Partition({1.0}), {vec({1.0})}), DomainError);
    EXPECT_THROW(nu_alpha_density(Dimensions(2), Partition({0.5}), {vec({0.0})}), DomainError);
}

TEST(NuDensity, ScalingAndRotationIdentities) {
    Engine eng = make_engine({23, 0});
    const Dimensions dims(3);
    const Partition p({0.3, 1.1, 1.9});
    for (int k = 0; k < 20; ++k) {
        MarginalVector xi{random_vec(2, eng), random_vec(2, eng), random_vec(2, eng)};
        EXPECT_LE(nu_scaling_residual(dims, p, xi, {-0.3, 2.5, 7.0}), 1e-12);
        std::vector<Eigen::MatrixXd> u{group::random_orthogonal(2, eng), group::random_orthogonal(2, eng), group::random_orthogonal(2, eng)};
        EXPECT_LE(nu_rotation_residual(dims, p, xi, u), 1e-12);
    }
}

TEST(RadonNikodym, MatchesDensityRatio) {
    Engine eng = make_engine({24, 0});
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        const Partition p = n == 2 ? Partition({0.2, 0.5, 0.9}) : Partition({0.4, 1.0, 1.9});
        for (int k = 0; k < 100; ++k) {
            MarginalVector xi;
            for (std::size_t i = 0; i < p.size(); ++i) xi.push_back(random_vec(n - 1, eng, 2.0));
            const double ratio = std::exp(log_nu_density(dims, p, xi) - log_mu_density(dims, p, xi));
            EXPECT_NEAR(rn_derivative(dims, p, xi) / ratio, 1.0, 1e-10);
        }
    }
}

TEST(RadonNikodym, LimitCases) {
    // lam -> 0 for n = 2 gives V_{1/2}(r) = e^{2r}
    const double v = rn_derivative(Dimensions(2), Partition({1e-12}), {vec({0.8})});
    EXPECT_NEAR(v, std::exp(1.6), 1e-9);
    // xi -> 0: 2^{-m}
    const double near0 = rn_derivative(Dimensions(3), Partition({0.5, 0.7}), {vec({1e-9, 0.0}), vec({0.0, 1e-9})});
    EXPECT_NEAR(near0 / std::pow(2.0, -1.2), 1.0, 1e-10);
}

TEST(DensityV, ValuesAndOverflowGuard) {
    const Dimensions d2(2), d3(3);
    EXPECT_NEAR(density_v(d2, {}, 1.5), std::pow(2.0, -1.5), 1e-15);
    EXPECT_NEAR(density_v(d2, atoms({{0.3, vec({1.0})}}), 1.0), 0.5 * std::exp(2.0), 1e-12);
    // n = 2: 2^{-m} exp(2 sum |c|)
    EXPECT_NEAR(log_density_v(d2, atoms({{0.1, vec({-0.5})}, {0.6, vec({2.0})}}), 2.0), -2 * std::log(2.0) + 5.0, 1e-12);
    const double big = log_density_v(d3, atoms({{0.1, vec({400.0, 0.0})}, {0.2, vec({0.0, 500.0})}}), 1.0);
    EXPECT_TRUE(std::isfinite(big));
    EXPECT_GT(big, 1700.0);
}

TEST(DensityV, LogPartialSumsAreCauchy) {
    // planted geometric tail: |c^i| = 5 q^i, total <= 10
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        const double q = 0.5;
        const int total_atoms = 60;
        std::vector<double> mags;
        for (int i = 0; i < total_atoms; ++i) mags.push_back(5.0 * std::pow(q, i));
        double full = 0.0;
        for (double m : mags) full += specfun::log_v_rho(0.5 * (n - 1), m);
        double partial = 0.0, tail = 0.0;
        for (double m : mags) tail += m;
        for (int N = 0; N < total_atoms; ++N) {
            partial += specfun::log_v_rho(0.5 * (n - 1), mags[N]);
            tail -= mags[N];
            EXPECT_LE(std::fabs(full - partial), 2.0 * tail + 1e-12) << n << " " << N;
        }
    }
}

TEST(NuChar, ValuesAndCoherence) {
    EXPECT_NEAR(nu_char(Partition({1.0}), {vec({2.0})}), 0.5, 1e-15);
    EXPECT_THROW(nu_char(Partition({1.0}), {vec({0.0})}), DomainError);
    const Partition a({0.5, 1.0});
    const CellVector g{vec({0.4, 1.0}), vec({-2.0, 0.3})};
    EXPECT_EQ(nu_coherence_residual(split_evenly(a, 1), g), 0.0);
    EXPECT_LE(nu_coherence_residual(split_cell(a, 1, {0.5, 0.5}), g), 1e-15);
    const auto ab = split_evenly(a, 2);
    const auto bc = split_cell(ab.child, 0, {0.1, 0.15});
    const auto ac = chain(ab, bc);
    EXPECT_EQ(mass_conservation_residual(ac), 0.0);
    EXPECT_LE(nu_coherence_residual(ac, g), 1e-14);
    EXPECT_THROW(split_cell(a, 0, {0.1, 0.1}), ConfigError);
}

TEST(Refinement, PushDownSumsChildCells) {
    const Partition a({1.0, 1.0});
    const auto r = split_evenly(a, 2);
    const MarginalVector xi{vec({1.0}), vec({2.0}), vec({-1.0}), vec({0.5})};
    const auto down = push_down(r, xi);
    EXPECT_EQ(down[0](0), 3.0);
    EXPECT_EQ(down[1](0), -0.5);
}

TEST(Refinement, ProjectAssignsAtomsToCells) {
    const auto c = atoms({{0.1, vec({1.0})}, {0.4, vec({2.0})}, {0.6, vec({4.0})}, {1.0, vec({8.0})}});
    const auto xi = project(c, Partition({0.5, 0.5}));
    EXPECT_EQ(xi[0](0), 3.0);
    EXPECT_EQ(xi[1](0), 12.0);
}

TEST(Refinement, RadonNikodymConvergesToDensityV) {
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const auto c = n == 2 ? atoms({{0.13, vec({0.7})}, {0.52, vec({-1.1})}, {0.81, vec({0.4})}})
                              : atoms({{0.13, vec({0.7, 0.2})}, {0.52, vec({-1.1, 0.5})}, {0.81, vec({0.4, -0.9})}});
        const auto lim = refinement_limit(dims, c, 1.0);
        ASSERT_EQ(lim.log_values.size(), 5u);
        EXPECT_LE(lim.final_relative_error, 1e-2) << n;
        EXPECT_LE(lim.richardson_relative_error, lim.final_relative_error) << n;
        // errors shrink along the sequence
        for (std::size_t k = 2; k < lim.log_values.size(); ++k)
            EXPECT_LT(std::fabs(lim.log_values[k] - lim.log_target), std::fabs(lim.log_values[k - 1] - lim.log_target)) << n << " " << k;
    }
}
