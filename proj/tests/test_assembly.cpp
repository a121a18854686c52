#include "test_helpers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <catch2/catch_amalgamated.hpp>

using namespace swfe;

namespace {

const std::string kRefTriangle = "nodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\n";

double rel_entry_diff(const SparseOperator& a, const SparseOperator& b) {
    Eigen::SparseMatrix<double> d = a.matrix() - b.matrix();
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m / a.max_abs();
}

}  // namespace

TEST_CASE("velocity mass for constants", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 6);
    const ElementPair pair = make_element_pair("P0-P1", mesh);
    const SparseOperator mu = velocity_mass(pair);

    // P0 vector mass is diagonal with the element area in both components
    const Eigen::MatrixXd d = mu.dense();
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        CHECK(d(2 * e, 2 * e) == Catch::Approx(mesh.triangle_area(e)).epsilon(1e-13));
        CHECK(d(2 * e + 1, 2 * e + 1) == Catch::Approx(mesh.triangle_area(e)).epsilon(1e-13));
    }
    CHECK((d - Eigen::MatrixXd(d.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);

    // partition of unity: one component of ones integrates to the domain area
    Eigen::VectorXd ones_x = Eigen::VectorXd::Zero(pair.V.ndof());
    for (int g = 0; g < pair.V.scalar().ndof(); ++g) ones_x[2 * g] = 1.0;
    CHECK(std::abs(ones_x.dot(mu.apply(ones_x)) - 1.0) <= 1e-13);
}

TEST_CASE("p1dg element mass block", "[assembly]") {
    const Mesh mesh = load_mesh(kRefTriangle);
    const ElementPair pair = make_element_pair("P1DG-P2", mesh);
    const Eigen::MatrixXd d = velocity_mass(pair).dense();
    Eigen::Matrix3d expected;
    expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    expected /= 24.0;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(std::abs(d(2 * i + c, 2 * j + c) - expected(i, j)) <= 1e-15);
}

TEST_CASE("pressure mass properties", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 6);
    const ElementPair pair = make_element_pair("P1DG-P2", mesh);
    const SparseOperator meta = pressure_mass(pair);

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(pair.H.ndof());
    CHECK(std::abs(ones.dot(meta.apply(ones)) - 1.0) <= 1e-13);

    // SPD (dense check at desk scale)
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(meta.dense());
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // P1 on the minimal mesh: row sums are the lumped nodal areas
    const Mesh small = generate_square_mesh(1, 0.0, 0);
    const ElementPair p01 = make_element_pair("P0-P1", small);
    const Eigen::VectorXd lumped = pressure_mass(p01).dense().rowwise().sum();
    CHECK(std::abs(lumped.sum() - 1.0) <= 1e-14);
    for (int i = 0; i < lumped.size(); ++i) CHECK(lumped[i] > 0.0);
}

TEST_CASE("gradient of constants vanishes", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 2);
    for (const char* name : {"P0-P1", "P1DG-P2", "P2DG-P3", "P1-P1"}) {
        const ElementPair pair = make_element_pair(name, mesh);
        const SparseOperator g = gradient_op(pair);
        const Eigen::VectorXd gc = g.apply(Eigen::VectorXd::Ones(pair.H.ndof()));
        INFO(name);
        CHECK(gc.lpNorm<Eigen::Infinity>() <= 1e-14 * g.max_abs());
    }
}

TEST_CASE("discrete gradient of a linear field is exact", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 2);
    for (const char* name : {"P0-P1", "P1DG-P2", "P2DG-P3"}) {
        const ElementPair pair = make_element_pair(name, mesh);
        const Eigen::VectorXd eta = pair.H.interpolate([](const Vec2& p) { return p.x(); });
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(velocity_mass(pair).matrix());
        const Eigen::VectorXd q = ldlt.solve(gradient_op(pair).apply(eta));
        for (int g = 0; g < pair.V.scalar().ndof(); ++g) {
            CHECK(std::abs(q[2 * g] - 1.0) <= 1e-12);
            CHECK(std::abs(q[2 * g + 1]) <= 1e-12);
        }
    }
}

TEST_CASE("coriolis skewness and blocks", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 9);
    const ElementPair pair = make_element_pair("P0-P1", mesh);
    const SparseOperator c = coriolis_op(pair);
    CHECK(c.symmetry() == Symmetry::skew);

    for (int t = 0; t < 10; ++t) {
        const Eigen::VectorXd u = testing::random_coeffs(pair.V.ndof(), 100 + static_cast<std::uint64_t>(t));
        CHECK(std::abs(u.dot(c.apply(u))) <= 1e-13 * u.squaredNorm());
    }

    const Eigen::MatrixXd d = c.dense();
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double area = mesh.triangle_area(e);
        CHECK(d(2 * e, 2 * e) == 0.0);
        CHECK(std::abs(d(2 * e, 2 * e + 1) + area) <= 1e-14);
        CHECK(std::abs(d(2 * e + 1, 2 * e) - area) <= 1e-14);
    }

    // perp of perp is minus the identity on elementwise constants
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(velocity_mass(pair).matrix());
    for (int t = 0; t < 3; ++t) {
        const Eigen::VectorXd u = testing::random_coeffs(pair.V.ndof(), 200 + static_cast<std::uint64_t>(t));
        const Eigen::VectorXd uu = ldlt.solve(c.apply(ldlt.solve(c.apply(u))));
        CHECK((uu + u).lpNorm<Eigen::Infinity>() <= 1e-12 * u.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("stiffness literal on the reference triangle", "[assembly]") {
    const Mesh mesh = load_mesh(kRefTriangle);
    const ElementPair pair = make_element_pair("P0-P1", mesh);
    Eigen::Matrix3d expected;
    expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    expected *= 0.5;
    CHECK((stiffness(pair).dense() - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("stiffness annihilates constants", "[assembly]") {
    const Mesh mesh = generate_square_mesh(5, 0.2, 4);
    for (const char* name : {"P0-P1", "P1DG-P2", "P2DG-P3"}) {
        const ElementPair pair = make_element_pair(name, mesh);
        const SparseOperator k = stiffness(pair);
        CHECK(k.apply(Eigen::VectorXd::Ones(pair.H.ndof())).lpNorm<Eigen::Infinity>() <= 1e-13 * k.max_abs());
    }
}

TEST_CASE("stiffness spectrum approaches the Neumann eigenvalue", "[assembly]") {
    const Mesh mesh = generate_square_mesh(16, 0.0, 0);
    const ElementPair pair = make_element_pair("P0-P1", mesh);  // H is P1
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness(pair).dense(),
                                                                 pressure_mass(pair).dense());
    const double lambda1 = es.eigenvalues()[1];
    CHECK(std::abs(lambda1 - M_PI * M_PI) / (M_PI * M_PI) <= 0.05);
}

TEST_CASE("one gradient matrix serves both weak equations", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 12);
    const ElementPair pair = make_element_pair("P1DG-P2", mesh);
    const SparseOperator g = gradient_op(pair);
    for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd eta = testing::random_coeffs(pair.H.ndof(), 300 + static_cast<std::uint64_t>(t));
        const Eigen::VectorXd u = testing::random_coeffs(pair.V.ndof(), 400 + static_cast<std::uint64_t>(t));
        const double a = u.dot(g.apply(eta));
        const double b = eta.dot(g.apply_transpose(u));
        CHECK(std::abs(a - b) <= 1e-13 * (std::abs(a) + 1.0));
    }
}

TEST_CASE("operators are invariant under node renumbering", "[assembly]") {
    const Mesh mesh = generate_square_mesh(4, 0.2, 15);
    auto spectrum = [](const Mesh& m) {
        const ElementPair pair = make_element_pair("P0-P1", m);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(stiffness(pair).dense(),
                                                                     pressure_mass(pair).dense());
        return Eigen::VectorXd(es.eigenvalues());
    };
    const Eigen::VectorXd base = spectrum(mesh);

    for (std::uint64_t seed : {71u, 72u}) {
        auto gen = testing::rng(seed);
        std::vector<int> perm(static_cast<std::size_t>(mesh.num_nodes()));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[gen() % i]);

        std::vector<Vec2> nodes(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) nodes[static_cast<std::size_t>(perm[i])] = mesh.nodes()[i];
        std::vector<Triangle> tris = mesh.triangles();
        for (Triangle& t : tris)
            for (int& v : t.v) v = perm[static_cast<std::size_t>(v)];

        const Eigen::VectorXd renumbered = spectrum(Mesh(std::move(nodes), std::move(tris)));
        CHECK((renumbered - base).lpNorm<Eigen::Infinity>() <= 1e-10 * base.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("assembly is exact: higher quadrature changes nothing", "[assembly]") {
    const Mesh mesh = generate_square_mesh(3, 0.2, 18);
    for (const char* name : {"P0-P1", "P1DG-P2", "P2DG-P3", "P1-P1"}) {
        const ElementPair pair = make_element_pair(name, mesh);
        const int d = pair_quadrature_degree(pair);
        const int higher = std::min(2 * d, 8);
        INFO(name << ": degree " << d << " vs " << higher);
        CHECK(rel_entry_diff(velocity_mass(pair), velocity_mass(pair, higher)) <= 1e-13);
        CHECK(rel_entry_diff(pressure_mass(pair), pressure_mass(pair, higher)) <= 1e-13);
        CHECK(rel_entry_diff(gradient_op(pair), gradient_op(pair, higher)) <= 1e-13);
        CHECK(rel_entry_diff(coriolis_op(pair), coriolis_op(pair, higher)) <= 1e-13);
        CHECK(rel_entry_diff(stiffness(pair), stiffness(pair, higher)) <= 1e-13);
    }
}

TEST_CASE("sparse operator symmetry tags are enforced", "[assembly]") {
    std::vector<Eigen::Triplet<double>> bad = {{0, 1, 1.0}, {1, 0, 2.0}};
    CHECK_THROWS_AS(SparseOperator(2, 2, bad, Symmetry::symmetric), std::logic_error);
    CHECK_THROWS_AS(SparseOperator(2, 2, bad, Symmetry::skew), std::logic_error);
    CHECK_NOTHROW(SparseOperator(2, 2, bad, Symmetry::general));

    // duplicates are summed on compression
    std::vector<Eigen::Triplet<double>> dup = {{0, 0, 1.0}, {0, 0, 2.0}};
    const SparseOperator op(1, 1, dup, Symmetry::symmetric);
    CHECK(op.nonzeros() == 1);
    CHECK(op.dense()(0, 0) == 3.0);
}

TEST_CASE("matrix market round trip", "[assembly]") {
    const Mesh mesh = generate_square_mesh(3, 0.2, 21);
    const ElementPair pair = make_element_pair("P1DG-P2", mesh);
    const SparseOperator k = stiffness(pair);
    const std::string text = to_matrix_market(k);
    CHECK(text.rfind("%%MatrixMarket matrix coordinate real general\n", 0) == 0);

    const SparseOperator r = read_matrix_market_text(text);
    REQUIRE(r.rows() == k.rows());
    REQUIRE(r.cols() == k.cols());
    CHECK((r.matrix() - k.matrix()).norm() == 0.0);

    // 1-based indices
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::getline(in, line);
    std::istringstream entry(line);
    int i = 0, j = 0;
    entry >> i >> j;
    CHECK(i >= 1);
    CHECK(j >= 1);

    CHECK_THROWS_AS(read_matrix_market_text("%%MatrixMarket matrix array real general\n1 1\n0\n"), ParseError);
    CHECK_THROWS_WITH(read_matrix_market_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 0.5\n"),
                      Catch::Matchers::ContainsSubstring("line 3"));
}
