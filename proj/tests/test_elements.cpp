#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace swfe;

TEST_CASE("quadrature table properties", "[elements]") {
    for (int degree : {1, 2, 3, 4, 5, 6, 7, 8}) {
        const QuadratureRule& rule = quadrature(degree);
        INFO("requested degree " << degree << ", rule degree " << rule.exact_degree);
        REQUIRE(rule.exact_degree >= degree);
        double wsum = 0.0;
        for (double w : rule.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(std::abs(wsum - 0.5) <= 1e-14);
    }
    CHECK(quadrature(1).points.size() == 1);
    CHECK(quadrature(1).points[0].isApprox(Vec2(1.0 / 3, 1.0 / 3)));
    CHECK_THROWS_AS(quadrature(9), std::invalid_argument);
    CHECK_THROWS_AS(quadrature(-1), std::invalid_argument);
}

TEST_CASE("monomial oracle certifies every rule", "[elements]") {
    for (const int degree : {1, 2, 4, 5, 6, 8}) {
        const QuadratureRule& rule = quadrature(degree);
        for (int a = 0; a + 0 <= rule.exact_degree; ++a) {
            for (int b = 0; a + b <= rule.exact_degree; ++b) {
                double got = 0.0;
                for (std::size_t q = 0; q < rule.points.size(); ++q)
                    got += rule.weights[q] * std::pow(rule.points[q].x(), a) * std::pow(rule.points[q].y(), b);
                INFO("rule " << rule.exact_degree << " monomial x^" << a << " y^" << b);
                CHECK(std::abs(got - testing::monomial_integral(a, b)) <= 1e-13);
            }
        }
    }
}

TEST_CASE("specific quadrature values", "[elements]") {
    // degree 4: integral of x^2 y^2 = 2! 2! / 6! = 1/180
    const QuadratureRule& r4 = quadrature(4);
    double v = 0.0;
    for (std::size_t q = 0; q < r4.points.size(); ++q)
        v += r4.weights[q] * r4.points[q].x() * r4.points[q].x() * r4.points[q].y() * r4.points[q].y();
    CHECK(std::abs(v - 1.0 / 180.0) <= 1e-13);
    CHECK(quadrature(8).points.size() == 16);
}

TEST_CASE("lagrange basis kronecker property", "[elements]") {
    for (int k = 0; k <= 4; ++k) {
        const ReferenceBasis basis(k);
        REQUIRE(basis.node_count() == (k + 1) * (k + 2) / 2);
        for (int i = 0; i < basis.node_count(); ++i) {
            const Eigen::VectorXd vals = basis.eval(basis.dof_points()[static_cast<std::size_t>(i)]);
            for (int j = 0; j < basis.node_count(); ++j) {
                INFO("degree " << k << " dof " << i << " basis " << j);
                CHECK(std::abs(vals[j] - (i == j ? 1.0 : 0.0)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("partition of unity", "[elements]") {
    auto gen = testing::rng(5);
    for (int k = 0; k <= 4; ++k) {
        const ReferenceBasis basis(k);
        for (int t = 0; t < 10; ++t) {
            const Vec2 p = testing::random_interior_point(gen);
            CHECK(std::abs(basis.eval(p).sum() - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("documented dof ordering", "[elements]") {
    const ReferenceBasis p1(1);
    CHECK(p1.eval(Vec2(0, 0)).isApprox(Eigen::Vector3d(1, 0, 0), 1e-14));

    const ReferenceBasis p2(2);
    REQUIRE(p2.node_count() == 6);
    const Eigen::VectorXd at_mid = p2.eval(Vec2(0.5, 0.0));
    for (int j = 0; j < 6; ++j) CHECK(std::abs(at_mid[j] - (j == 3 ? 1.0 : 0.0)) <= 1e-12);

    // edge order: (v0,v1), (v1,v2), (v2,v0)
    CHECK(p2.dof_points()[4].isApprox(Vec2(0.5, 0.5)));
    CHECK(p2.dof_points()[5].isApprox(Vec2(0.0, 0.5)));
}

TEST_CASE("p1 gradients are constant", "[elements]") {
    const ReferenceBasis p1(1);
    auto gen = testing::rng(7);
    for (int t = 0; t < 5; ++t) {
        const auto g = p1.grad(testing::random_interior_point(gen));
        CHECK(g(0, 0) == Catch::Approx(-1.0));
        CHECK(g(0, 1) == Catch::Approx(-1.0));
        CHECK(g(1, 0) == Catch::Approx(1.0));
        CHECK(g(2, 1) == Catch::Approx(1.0));
    }
}

TEST_CASE("gradients match finite differences", "[elements]") {
    auto gen = testing::rng(11);
    for (int k = 1; k <= 4; ++k) {
        const ReferenceBasis basis(k);
        for (int t = 0; t < 20; ++t) {
            const Vec2 p = testing::random_interior_point(gen);
            const auto g = basis.grad(p);
            for (int i = 0; i < basis.node_count(); ++i) {
                const Vec2 fd = testing::fd_gradient(
                    [&](const Vec2& q) { return basis.eval(q)[i]; }, p);
                CHECK(std::abs(g(i, 0) - fd.x()) <= 1e-6);
                CHECK(std::abs(g(i, 1) - fd.y()) <= 1e-6);
            }
        }
    }
}

TEST_CASE("reference mass by quadrature matches exact integration", "[elements]") {
    for (int k = 0; k <= 4; ++k) {
        const ReferenceBasis basis(k);
        const QuadratureRule& rule = quadrature(2 * k);
        const int n = basis.node_count();
        Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Eigen::VectorXd phi = basis.eval(rule.points[q]);
            mass += rule.weights[q] * phi * phi.transpose();
        }
        const Eigen::MatrixXd exact = testing::exact_reference_mass(k);
        INFO("degree " << k);
        CHECK((mass - exact).cwiseAbs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("degree 1 reference mass literal", "[elements]") {
    Eigen::Matrix3d expected;
    expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    expected /= 24.0;
    CHECK((testing::exact_reference_mass(1) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("unsupported degrees are rejected", "[elements]") {
    CHECK_THROWS_AS(lagrange_basis(5), std::invalid_argument);
    CHECK_THROWS_AS(lagrange_basis(-1), std::invalid_argument);
}
