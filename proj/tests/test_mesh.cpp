#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace swfe;

TEST_CASE("minimal square split", "[mesh]") {
    const Mesh m = generate_square_mesh(1, 0.0, 0);
    CHECK(m.num_nodes() == 4);
    CHECK(m.num_triangles() == 2);
    CHECK(m.boundary_edges().size() == 4);
    CHECK(m.num_edges() == 5);
}

TEST_CASE("structured counts and exact area", "[mesh]") {
    const Mesh m = generate_square_mesh(4, 0.0, 0);
    CHECK(m.num_nodes() == 25);
    CHECK(m.num_triangles() == 32);
    CHECK(m.total_area() == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("perturbed mesh stays valid", "[mesh]") {
    const Mesh m = generate_square_mesh(8, 0.2, 7);
    REQUIRE(m.num_triangles() == 128);
    for (int e = 0; e < m.num_triangles(); ++e) CHECK(m.triangle_area(e) > 0.0);
    CHECK(std::abs(m.total_area() - 1.0) <= 1e-12);
}

TEST_CASE("area closure via affine determinants", "[mesh]") {
    const Mesh m = generate_square_mesh(8, 0.25, 3);
    double area = 0.0;
    for (int e = 0; e < m.num_triangles(); ++e) area += 0.5 * m.affine_map(e).det;
    CHECK(std::abs(area - 1.0) <= 1e-12);
}

TEST_CASE("generation is deterministic per seed", "[mesh]") {
    const Mesh a = generate_square_mesh(6, 0.2, 42);
    const Mesh b = generate_square_mesh(6, 0.2, 42);
    const Mesh c = generate_square_mesh(6, 0.2, 43);
    REQUIRE(a.num_nodes() == b.num_nodes());
    bool identical = true, differs = false;
    for (int i = 0; i < a.num_nodes(); ++i) {
        identical = identical && a.nodes()[i] == b.nodes()[i];
        differs = differs || a.nodes()[i] != c.nodes()[i];
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("boundary nodes are never moved", "[mesh]") {
    const Mesh m = generate_square_mesh(5, 0.3, 11);
    for (const Vec2& p : m.nodes()) {
        const bool on_edge = p.x() == 0.0 || p.y() == 0.0 || p.x() == 1.0 || p.y() == 1.0;
        if (on_edge) {
            // the unperturbed lattice point must be hit exactly
            CHECK(std::abs(p.x() * 5 - std::round(p.x() * 5)) == 0.0);
            CHECK(std::abs(p.y() * 5 - std::round(p.y() * 5)) == 0.0);
        }
    }
}

TEST_CASE("generator rejects bad arguments", "[mesh]") {
    CHECK_THROWS_AS(generate_square_mesh(0, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_square_mesh(4, 0.31, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate_square_mesh(4, -0.1, 0), std::invalid_argument);
}

TEST_CASE("boundary edges are exactly the single-triangle edges", "[mesh]") {
    const Mesh m = generate_square_mesh(6, 0.2, 5);
    std::size_t single = 0;
    for (const auto& [key, rec] : m.edge_table()) {
        REQUIRE((rec.count == 1 || rec.count == 2));
        if (rec.count == 1) ++single;
    }
    CHECK(single == m.boundary_edges().size());
    for (const BoundaryEdge& e : m.boundary_edges())
        CHECK(m.edge_table().at(std::minmax(e.a, e.b)).count == 1);
}

TEST_CASE("mesh file round trip", "[mesh]") {
    const Mesh m = generate_square_mesh(3, 0.2, 9);
    const Mesh r = load_mesh(write_mesh(m));
    REQUIRE(r.num_nodes() == m.num_nodes());
    REQUIRE(r.num_triangles() == m.num_triangles());
    for (int i = 0; i < m.num_nodes(); ++i) CHECK(r.nodes()[i] == m.nodes()[i]);
    for (int t = 0; t < m.num_triangles(); ++t) CHECK(r.triangles()[t].v == m.triangles()[t].v);
}

TEST_CASE("load matches generated minimal mesh", "[mesh]") {
    const std::string text =
        "# unit square\n"
        "nodes 4\n"
        "0 0\n"
        "1 0\n"
        "1 1\n"
        "0 1\n"
        "triangles 2\n"
        "0 1 2\n"
        "0 2 3\n";
    const Mesh loaded = load_mesh(text);
    const Mesh gen = generate_square_mesh(1, 0.0, 0);
    REQUIRE(loaded.num_nodes() == gen.num_nodes());
    REQUIRE(loaded.num_triangles() == gen.num_triangles());
    CHECK(loaded.total_area() == Catch::Approx(1.0));
    CHECK(loaded.boundary_edges().size() == 4);
}

TEST_CASE("clockwise triangles are reoriented on load", "[mesh]") {
    const std::string text =
        "nodes 3\n"
        "0 0\n"
        "1 0\n"
        "0 1\n"
        "triangles 1\n"
        "0 2 1\n";  // clockwise
    const Mesh m = load_mesh(text);
    CHECK(m.triangle_area(0) > 0.0);
}

TEST_CASE("loader reports the offending line", "[mesh]") {
    const std::string bad_index =
        "nodes 4\n0 0\n1 0\n1 1\n0 1\n"
        "triangles 1\n"
        "0 1 99\n";
    CHECK_THROWS_WITH(load_mesh(bad_index),
                      Catch::Matchers::ContainsSubstring("line 7") &&
                          Catch::Matchers::ContainsSubstring("99"));

    CHECK_THROWS_WITH(load_mesh("vertices 4\n"), Catch::Matchers::ContainsSubstring("line 1"));

    const std::string zero_area =
        "nodes 3\n0 0\n1 0\n2 0\n"
        "triangles 1\n0 1 2\n";
    CHECK_THROWS_WITH(load_mesh(zero_area), Catch::Matchers::ContainsSubstring("line 6") &&
                                                Catch::Matchers::ContainsSubstring("zero area"));

    CHECK_THROWS_WITH(load_mesh("nodes 2\n0 0\n"), Catch::Matchers::ContainsSubstring("unexpected end"));
}

TEST_CASE("affine map basics", "[mesh]") {
    const std::string ref_tri =
        "nodes 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1 2\n";
    const AffineMap ref = load_mesh(ref_tri).affine_map(0);
    CHECK(ref.jacobian.isApprox(Eigen::Matrix2d::Identity(), 1e-15));
    CHECK(ref.det == Catch::Approx(1.0));

    const std::string scaled =
        "nodes 3\n0 0\n0.25 0\n0 0.25\ntriangles 1\n0 1 2\n";
    CHECK(load_mesh(scaled).affine_map(0).det == Catch::Approx(0.0625));
}

TEST_CASE("affine inverse transpose is consistent", "[mesh]") {
    auto gen = testing::rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::ostringstream ss;
        ss << "nodes 3\n";
        ss << testing::uniform(gen, -1, 1) << " " << testing::uniform(gen, -1, 1) << "\n";
        ss << testing::uniform(gen, 1.5, 2.5) << " " << testing::uniform(gen, -1, 1) << "\n";
        ss << testing::uniform(gen, -1, 1) << " " << testing::uniform(gen, 1.5, 2.5) << "\n";
        ss << "triangles 1\n0 1 2\n";
        const AffineMap m = load_mesh(ss.str()).affine_map(0);
        CHECK((m.inv_transpose.transpose() * m.jacobian - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <=
              1e-14);
    }
}

TEST_CASE("on_boundary point queries", "[mesh]") {
    const Mesh m = generate_square_mesh(4, 0.2, 1);
    CHECK(m.on_boundary(Vec2(0.3, 0.0)));
    CHECK(m.on_boundary(Vec2(1.0, 0.7)));
    CHECK_FALSE(m.on_boundary(Vec2(0.5, 0.5)));
}
