#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include "currents/quadrature.hpp"

using namespace currents;
using namespace currents::quadrature;

namespace {

const double kPi = std::numbers::pi;

// Fourier constant in the e^{i<xi,x>} convention, used only as an oracle here.
double cn_oracle(int n) { return std::pow(4.0 * kPi, 0.5 * (n - 1)); }

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST(Wynn, AcceleratesAlternatingSeries) {
    std::vector<double> s;
    double sum = 0.0;
    for (int k = 1; k <= 20; ++k) {
        sum += (k % 2 ? 1.0 : -1.0) / k;
        s.push_back(sum);
    }
    EXPECT_NEAR(detail::wynn_epsilon(s).value, std::log(2.0), 1e-12);
}

TEST(Wynn, ConstantSequenceDoesNotBreak) {
    const auto w = detail::wynn_epsilon({1.5, 1.5, 1.5, 1.5, 1.5});
    EXPECT_EQ(w.value, 1.5);
    EXPECT_TRUE(std::isfinite(w.error));
}

TEST(RadialFourier, OriginIsTotalMass) {
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        RadialProfile p{[&](double r) { return specfun::marginal_radial_density(dims, 0.7, r); }, 0.7 - (n - 1)};
        EXPECT_NEAR(radial_fourier(dims, p, 0.0).value, 1.0, 1e-9) << n;
    }
}

TEST(RadialFourier, ClosedFormPairs) {
    // 2 int e^{-2r} cos(w r) dr = 4 / (4 + w^2)
    RadialProfile e2{[](double r) { return std::exp(-2 * r); }, 0.0};
    EXPECT_NEAR(radial_fourier(Dimensions(2), e2, 0.5).value, 4.0 / 4.25, 1e-12);
    // Gaussian in the plane: 2 pi e^{-w^2/2}
    const auto g = radial_fourier(Dimensions(3), gaussian_profile(), 1.3);
    EXPECT_NEAR(g.value, 2 * kPi * std::exp(-0.5 * 1.69), 1e-11);
    EXPECT_GE(g.abs_error_estimate, 0.0);
    // R^3: (2 pi)^{3/2} e^{-w^2/2}
    EXPECT_NEAR(radial_fourier(Dimensions(4), gaussian_profile(), 0.7).value, std::pow(2 * kPi, 1.5) * std::exp(-0.245), 1e-10);
}

TEST(RadialFourier, SlowlyDecayingProfileNeedsAcceleration) {
    // n = 3, lam = 0.5: the Hankel integrand does not decay; the value is an Abel limit
    const Dimensions dims(3);
    const auto rep = radial_fourier(dims, power_profile(0.5), 1.0);
    EXPECT_NEAR(rep.value / power_transform_shape(dims, 0.5, 1.0), cn_oracle(3), 1e-8);
}

TEST(Calibration, ConstantIsFlatOverGrid) {
    for (int n : {2, 3}) {
        const auto fc = calibrate_cn(Dimensions(n));
        EXPECT_LE(fc.spread, 1e-6) << n;
        EXPECT_EQ(fc.ratios.size(), 12u);
        EXPECT_NEAR(fc.c_n / cn_oracle(n), 1.0, 1e-8) << n;
    }
}

TEST(Calibration, ShiftedParametrizationAgrees) {
    for (int n : {2, 3})
        for (double rho : {0.1, 0.5, 1.3})
            for (double r : {0.2, 1.0, 3.0}) EXPECT_LE(shifted_form_residual(Dimensions(n), rho, r), 1e-10);
}

TEST(PowerTransform, PairingFormWithSameConstant) {
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const double cn = calibrate_cn(dims).c_n;
        const std::vector<double> lams = n == 2 ? std::vector<double>{0.25, 0.5, 0.75} : std::vector<double>{0.5, 1.0, 1.5};
        for (double lam : lams) {
            EXPECT_LE(power_pairing_residual(dims, lam, cn, gaussian_profile()), 1e-5) << n << " " << lam;
            EXPECT_LE(power_pairing_residual(dims, lam, cn, bump_profile()), 1e-5) << n << " " << lam;
        }
    }
}

TEST(InverseV, TransformMatchesCorrectedConstant) {
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const double cn = calibrate_cn(dims).c_n;
        for (double rho : {0.3, 0.5, 1.0, 1.7})
            for (double x : {0.0, 0.5, 1.0, 2.5}) {
                const double closed = inverse_v_transform_closed(dims, rho, x, cn);
                EXPECT_LE(std::fabs(inverse_v_transform(dims, rho, x) / closed - 1.0), 1e-5) << n << " " << rho << " " << x;
            }
    }
    // rho = 1/2, n = 2: 1/V = e^{-2r}, transform 4/(4+x^2)
    EXPECT_NEAR(inverse_v_transform_closed(Dimensions(2), 0.5, 1.0, cn_oracle(2)), 0.8, 1e-14);
}

TEST(InverseV, CriticalOrderTransformIsPositive) {
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        for (double x = 0.0; x <= 8.0; x += 0.5) EXPECT_GT(inverse_v_transform(dims, 0.5 * (n - 1), x), 0.0);
    }
}

TEST(Kernel, QuadratureMatchesClosedFormN2) {
    const Dimensions dims(2);
    for (double lam : {0.25, 0.5, 0.75})
        for (auto [a, b] : std::vector<std::pair<double, double>>{{0.5, 1.2}, {1.0, 0.3}, {-0.7, 2.0}, {2.0, -0.4}, {-1.5, -1.1}}) {
            const auto q = kernel_A(dims, lam, a, b);
            const double c = kernel_A_closed_n2(lam, a, b);
            EXPECT_NEAR(q.value / c, 1.0, 1e-7) << lam << " " << a << " " << b;
            EXPECT_LT(q.abs_error_estimate, 1e-6 * std::fabs(c) + 1e-12);
        }
}

TEST(Kernel, ReflectedOrderSymmetry) {
    // r -> 2/r exchanges the roles of xi and xi' and sends lam to 2d - lam
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const int d = n - 1;
        std::vector<std::pair<Vec, Vec>> pts;
        if (n == 2)
            pts = {{Vec::Constant(1, 0.8), Vec::Constant(1, 1.4)}, {Vec::Constant(1, -0.6), Vec::Constant(1, 0.9)}};
        else
            pts = {{v2(0.5, 0.2), v2(-0.3, 1.0)}, {v2(1.1, 0.0), v2(0.4, 0.4)}};
        for (double lam : {0.3, 0.6})
            for (const auto& [x, y] : pts) {
                const double a = kernel_A(dims, lam, x, y).value;
                const double b = kernel_A_unchecked(dims, 2.0 * d - lam, y, x).value;
                EXPECT_NEAR(a / b, 1.0, 1e-7) << n << " " << lam;
            }
    }
}

TEST(Kernel, RotationInvarianceN3) {
    const Dimensions dims(3);
    const double t = 0.9;
    Eigen::Matrix2d u;
    u << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Vec x = v2(0.6, -0.2), y = v2(0.3, 0.8);
    const Vec xu = (x.transpose() * u).transpose(), yu = (y.transpose() * u).transpose();
    EXPECT_NEAR(kernel_A(dims, 0.7, x, y).value, kernel_A(dims, 0.7, xu, yu).value, 1e-9);
}

TEST(Kernel, Domain) {
    EXPECT_THROW(kernel_A(Dimensions(2), 1.0, 0.5, 0.5), DomainError);
    EXPECT_THROW(kernel_A(Dimensions(2), 0.5, 0.0, 0.0), DomainError);
    EXPECT_THROW(kernel_A_closed_n2(0.5, 0.0, 1.0), DomainError);
}

TEST(LevyKhinchin, SingleConstantFitsGrid) {
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const auto fit = levy_khinchin_fit(dims, {0.5, 1.0, 2.0, 4.0});
        EXPECT_LE(fit.max_residual, 1e-4) << n;
        // measured constant: -2 pi^{-d/2}
        EXPECT_NEAR(fit.kappa, -2.0 * std::pow(kPi, -0.5 * (n - 1)), 1e-8) << n;
        EXPECT_LE(levy_khinchin_residual(dims, 1.0, fit.kappa), 1e-4);
    }
}

TEST(LevyKhinchin, SmallGammaLeadingCoefficient) {
    // both sides ~ |gamma|^2: LHS/|gamma|^2 -> 1/4
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const double kappa = -2.0 * std::pow(kPi, -0.5 * (n - 1));
        const double g = 1e-4;
        EXPECT_NEAR(kappa * levy_khinchin_rhs(dims, g).value / (g * g), 0.25, 1e-6);
    }
    EXPECT_THROW(levy_khinchin_residual(Dimensions(2), 0.0, -1.0), DomainError);
}
