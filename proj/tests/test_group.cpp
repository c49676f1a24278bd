#include <gtest/gtest.h>

#include "currents/group.hpp"

using namespace currents;
using namespace currents::group;

namespace {

Vec vec(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Vec random_vec(int d, Engine& eng) {
    boost::random::normal_distribution<double> nd;
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = nd(eng);
    return v;
}

double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Group, ZMatrixBlocks) {
    EXPECT_EQ(make_z(vec({0.0})), Mat::Identity(3, 3));
    Mat expect(3, 3);
    expect << 1, 0, 0, -2, 1, 0, -2, 2, 1;
    EXPECT_EQ(make_z(vec({2.0})), expect);
    const Vec a = vec({0.3, -1.2}), b = vec({2.0, 0.5});
    EXPECT_LT(max_abs(make_z(a) * make_z(b) - make_z(a + b)), 1e-14);
}

TEST(Group, DiagonalElements) {
    EXPECT_EQ(make_d(1.0, Mat::Identity(2, 2)), Mat::Identity(4, 4));
    Mat expect = Mat::Zero(3, 3);
    expect.diagonal() << 0.5, 1.0, 2.0;
    EXPECT_EQ(make_d(2.0, Mat::Identity(1, 1)), expect);
    EXPECT_LE(membership_residual(make_d(-3.0, Mat::Identity(2, 2))), 1e-12);
    Mat bad(2, 2);
    bad << 1, 1, 0, 1;
    EXPECT_THROW(make_d(1.0, bad), DomainError);
    EXPECT_THROW(make_d(0.0, Mat::Identity(2, 2)), DomainError);
}

TEST(Group, SSquaredIsIdentityExactly) {
    for (int n : {2, 3, 5}) {
        const Mat s = make_s(Dimensions(n));
        EXPECT_EQ(s * s, Mat::Identity(n + 1, n + 1));
    }
}

TEST(Group, SpecialActions) {
    const Vec g = vec({0.4, -1.1});
    EXPECT_LT((act(g, make_z(vec({1.0, 2.0}))) - vec({1.4, 0.9})).norm(), 1e-14);
    const double t = 0.6;
    Mat u(2, 2);
    u << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    const Vec expect = (g.transpose() * u).transpose() / 2.5;
    EXPECT_LT((act(g, make_d(2.5, u)) - expect).norm(), 1e-14);
    EXPECT_LT((act(vec({1.0, 0.0}), make_s(Dimensions(3))) - vec({-2.0, 0.0})).norm(), 1e-15);
    EXPECT_THROW(act(vec({0.0, 0.0}), make_s(Dimensions(3))), PointAtInfinity);
}

TEST(Group, SpecialCocycleValues) {
    const Vec g = vec({1.2, 1.6});  // |g| = 2
    EXPECT_EQ(cocycle_beta(g, make_z(vec({3.0, -1.0}))), 1.0);
    EXPECT_NEAR(cocycle_beta(g, make_d(-0.4, Mat::Identity(2, 2))), 0.4, 1e-15);
    EXPECT_NEAR(cocycle_beta(g, make_s(Dimensions(3))), 2.0, 1e-14);
}

TEST(Group, MembershipClosedUnderProductsAndInverses) {
    Engine eng = make_engine({11, 0});
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        Mat g = Mat::Identity(n + 1, n + 1);
        for (int k = 0; k < 20; ++k) {
            const Mat h = random_member(dims, eng, 3);
            g = g * h;
            EXPECT_LE(membership_residual(inverse(h)) / std::max(1.0, h.squaredNorm()), 1e-9);
        }
        EXPECT_LE(membership_residual(g) / std::max(1.0, g.squaredNorm()), 1e-9);
        EXPECT_LT(max_abs(g * inverse(g) - Mat::Identity(n + 1, n + 1)) / std::max(1.0, g.squaredNorm()), 1e-9);
    }
}

TEST(Group, RightActionLaw) {
    Engine eng = make_engine({12, 0});
    const Dimensions dims(3);
    for (int k = 0; k < 50; ++k) {
        const Mat g1 = random_member(dims, eng), g2 = random_member(dims, eng);
        const Vec x = random_vec(2, eng);
        const Vec a = act(act(x, g1), g2), b = act(x, g1 * g2);
        EXPECT_LT((a - b).norm(), 1e-8 * std::max(1.0, a.norm()));
    }
}

TEST(Group, CocycleLawForLastColumnForm) {
    Engine eng = make_engine({13, 0});
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        for (int k = 0; k < 100; ++k) {
            const Mat g1 = random_member(dims, eng), g2 = random_member(dims, eng);
            const Vec x = random_vec(n - 1, eng);
            const double lhs = cocycle_beta(x, g1 * g2);
            const double rhs = cocycle_beta(x, g1) * cocycle_beta(act(x, g1), g2);
            EXPECT_LE(std::fabs(lhs - rhs) / lhs, 1e-9);
        }
    }
}

TEST(Group, MiddleColumnFormFailsTheCocycleLaw) {
    // for a diagonal element it returns |gamma| instead of |eps|
    const Vec g = vec({0.7, 0.0});
    EXPECT_NEAR(cocycle_beta(g, make_d(3.0, Mat::Identity(2, 2)), BetaForm::middle_column), 0.7, 1e-15);
    Engine eng = make_engine({14, 0});
    const Dimensions dims(3);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const Mat g1 = random_member(dims, eng), g2 = random_member(dims, eng);
        const Vec x = random_vec(2, eng);
        const double lhs = cocycle_beta(x, g1 * g2, BetaForm::middle_column);
        const double rhs = cocycle_beta(x, g1, BetaForm::middle_column) * cocycle_beta(act(x, g1), g2, BetaForm::middle_column);
        worst = std::max(worst, std::fabs(lhs - rhs) / lhs);
    }
    EXPECT_GT(worst, 1e-2);
}

TEST(Group, ReflectionElement) {
    const Mat dg = d_of_gamma(vec({1.0, 0.0}));
    EXPECT_NEAR(dg(1, 1), -1.0, 1e-15);
    EXPECT_NEAR(dg(2, 2), 1.0, 1e-15);
    const Mat d2 = d_of_gamma(vec({1.0, 1.0}));
    EXPECT_NEAR(d2(0, 0), -1.0, 1e-15);
    EXPECT_NEAR(d2(3, 3), -1.0, 1e-15);
    const Mat u = d2.block(1, 1, 2, 2);
    EXPECT_LT(max_abs(u * u - Mat::Identity(2, 2)), 1e-15);
    EXPECT_THROW(d_of_gamma(vec({0.0, 0.0})), DomainError);
}

TEST(Group, ZSFactorizationThroughReflection) {
    // z(g) s = d(g) s z(-g) s z(j g)
    Engine eng = make_engine({15, 0});
    for (int n : {2, 3, 4}) {
        const Dimensions dims(n);
        const Mat s = make_s(dims);
        for (int k = 0; k < 20; ++k) {
            const Vec g = random_vec(n - 1, eng);
            const Mat lhs = make_z(g) * s;
            const Mat rhs = d_of_gamma(g) * s * make_z(-g) * s * make_z(j_of_gamma(g));
            EXPECT_LT(max_abs(lhs - rhs), 1e-10 * std::max(1.0, max_abs(lhs)));
        }
    }
}

TEST(Group, TriangularCompositionLaw) {
    Engine eng = make_engine({16, 0});
    for (int d : {1, 2, 3}) {
        for (int k = 0; k < 20; ++k) {
            const auto a = random_triangular(d, eng), b = random_triangular(d, eng);
            EXPECT_LT(max_abs(to_matrix(compose(a, b)) - to_matrix(a) * to_matrix(b)), 1e-12);
        }
    }
}

TEST(Group, FactorWordRoundTrip) {
    Engine eng = make_engine({17, 0});
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        for (int k = 0; k < 100; ++k) {
            const Mat g = random_member(dims, eng);
            const auto w = factor_word(g);
            EXPECT_LE(w.size(), 5u);
            EXPECT_LT(max_abs(evaluate(w, dims) - g), 1e-8 * std::max(1.0, max_abs(g)));
        }
    }
}

TEST(Group, FactorWordSpecialCases) {
    const Dimensions dims(3);
    Engine eng = make_engine({18, 0});
    const auto b = random_triangular(2, eng);
    EXPECT_EQ(factor_word(to_matrix(b)).size(), 1u);
    const auto ws = factor_word(make_s(dims));
    ASSERT_EQ(ws.size(), 1u);
    EXPECT_TRUE(std::holds_alternative<SLetter>(ws[0]));
    EXPECT_LT(max_abs(evaluate(ws, dims) - make_s(dims)), 1e-15);
    // upper triangular element s b s
    const Mat up = make_s(dims) * to_matrix(b) * make_s(dims);
    EXPECT_LT(max_abs(evaluate(factor_word(up), dims) - up), 1e-9);
    Mat bad = Mat::Identity(4, 4);
    bad(0, 1) = 1.0;
    EXPECT_THROW(factor_word(bad), DomainError);
}

TEST(Group, MeasureRelations) {
    Engine eng = make_engine({19, 0});
    for (int n : {2, 3}) {
        const Dimensions dims(n);
        const auto z = measure_relation_check(make_z(random_vec(n - 1, eng)), random_vec(n - 1, eng), random_vec(n - 1, eng));
        EXPECT_LE(z.jacobian, 1e-9);
        EXPECT_LE(z.distance, 1e-12);
        for (int k = 0; k < 100; ++k) {
            const Mat g = random_member(dims, eng);
            const auto r = measure_relation_check(g, random_vec(n - 1, eng), random_vec(n - 1, eng));
            EXPECT_LE(r.jacobian, 1e-6);
            EXPECT_LE(r.distance, 1e-6);
        }
    }
}

TEST(Group, SeededGenerationIsReproducible) {
    Engine a = make_engine({99, 3}), b = make_engine({99, 3}), c = make_engine({99, 4});
    const Dimensions dims(3);
    const Mat ga = random_member(dims, a), gb = random_member(dims, b), gc = random_member(dims, c);
    EXPECT_EQ(ga, gb);
    EXPECT_NE(ga, gc);
}
