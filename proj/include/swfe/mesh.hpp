#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swfe {

using Vec2 = Eigen::Vector2d;

/// 90-degree counterclockwise rotation: (x,y) -> (-y,x).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Error for malformed input text (mesh files, matrix files, configs).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Triangle {
    std::array<int, 3> v;
};

/// Boundary edge (a,b), oriented in the winding order of its owning triangle,
/// so the outward normal is (dy,-dx)/|d| with d = node(b)-node(a).
struct BoundaryEdge {
    int a = -1, b = -1, tri = -1;
};

struct EdgeRecord {
    int id = -1;
    std::array<int, 2> tris{-1, -1};
    int count = 0;
};

/// Affine map from the reference triangle {(0,0),(1,0),(0,1)} onto a physical one.
struct AffineMap {
    Vec2 origin;                   // image of (0,0)
    Eigen::Matrix2d jacobian;      // columns p1-p0, p2-p0
    double det = 0.0;              // twice the triangle area
    Eigen::Matrix2d inv_transpose;

    Vec2 apply(const Vec2& ref) const { return origin + jacobian * ref; }
    Vec2 to_physical_gradient(const Vec2& ref_grad) const { return inv_transpose * ref_grad; }
};

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * d)).norm();
}

namespace detail {

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Conforming triangular mesh. Immutable after construction; triangles are
/// normalized to counterclockwise orientation and the edge topology (including
/// the boundary) is derived from the connectivity.
class Mesh {
public:
    Mesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles)
        : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
        validate_and_orient();
        build_topology();
    }

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_edges() const { return static_cast<int>(edge_table_.size()); }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

    /// Sorted node pair -> edge id and adjacent triangles.
    const std::map<std::pair<int, int>, EdgeRecord>& edge_table() const { return edge_table_; }

    AffineMap affine_map(int elem) const {
        const Triangle& t = triangles_.at(static_cast<std::size_t>(elem));
        const Vec2& p0 = nodes_[static_cast<std::size_t>(t.v[0])];
        const Vec2& p1 = nodes_[static_cast<std::size_t>(t.v[1])];
        const Vec2& p2 = nodes_[static_cast<std::size_t>(t.v[2])];
        AffineMap m;
        m.origin = p0;
        m.jacobian.col(0) = p1 - p0;
        m.jacobian.col(1) = p2 - p0;
        m.det = m.jacobian.determinant();
        m.inv_transpose = m.jacobian.inverse().transpose();
        return m;
    }

    double triangle_area(int elem) const { return 0.5 * affine_map(elem).det; }

    double total_area() const {
        double a = 0.0;
        for (int e = 0; e < num_triangles(); ++e) a += triangle_area(e);
        return a;
    }

    /// Characteristic mesh size h: maximum edge length.
    double max_edge_length() const { return h_max_; }

    bool on_boundary(const Vec2& p, double tol = 1e-12) const {
        for (const BoundaryEdge& e : boundary_edges_) {
            if (point_segment_distance(p, nodes_[static_cast<std::size_t>(e.a)],
                                       nodes_[static_cast<std::size_t>(e.b)]) < tol)
                return true;
        }
        return false;
    }

private:
    void validate_and_orient() {
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            for (int k = 0; k < 3; ++k) {
                const int v = triangles_[t].v[static_cast<std::size_t>(k)];
                if (v < 0 || v >= num_nodes())
                    throw std::invalid_argument("mesh: triangle " + std::to_string(t) +
                                                " references node " + std::to_string(v) +
                                                " out of range [0, " + std::to_string(num_nodes()) + ")");
            }
            auto& tri = triangles_[t].v;
            const double a2 = cross2(nodes_[static_cast<std::size_t>(tri[1])] - nodes_[static_cast<std::size_t>(tri[0])],
                                     nodes_[static_cast<std::size_t>(tri[2])] - nodes_[static_cast<std::size_t>(tri[0])]);
            if (a2 == 0.0)
                throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " has zero area");
            if (a2 < 0.0) std::swap(tri[1], tri[2]);
        }
    }

    void build_topology() {
        int next_id = 0;
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& v = triangles_[t].v;
            for (int k = 0; k < 3; ++k) {
                const int a = v[static_cast<std::size_t>(k)];
                const int b = v[static_cast<std::size_t>((k + 1) % 3)];
                auto key = std::minmax(a, b);
                EdgeRecord& rec = edge_table_[key];
                if (rec.count == 0) rec.id = next_id++;
                if (rec.count >= 2)
                    throw std::invalid_argument("mesh: edge (" + std::to_string(key.first) + "," +
                                                std::to_string(key.second) + ") shared by more than two triangles");
                rec.tris[static_cast<std::size_t>(rec.count++)] = static_cast<int>(t);
            }
        }
        for (std::size_t t = 0; t < triangles_.size(); ++t) {
            const auto& v = triangles_[t].v;
            for (int k = 0; k < 3; ++k) {
                const int a = v[static_cast<std::size_t>(k)];
                const int b = v[static_cast<std::size_t>((k + 1) % 3)];
                if (edge_table_.at(std::minmax(a, b)).count == 1)
                    boundary_edges_.push_back({a, b, static_cast<int>(t)});
            }
        }
        h_max_ = 0.0;
        for (const auto& [key, rec] : edge_table_)
            h_max_ = std::max(h_max_, (nodes_[static_cast<std::size_t>(key.first)] -
                                       nodes_[static_cast<std::size_t>(key.second)]).norm());
    }

    std::vector<Vec2> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::map<std::pair<int, int>, EdgeRecord> edge_table_;
    double h_max_ = 0.0;
};

/// Triangulation of the unit square with 2n^2 elements. Interior nodes are
/// displaced by uniform random offsets of magnitude at most perturb/n;
/// boundary nodes stay put, so the domain remains exactly [0,1]^2.
/// Deterministic for a given (n, perturb, seed).
inline Mesh generate_square_mesh(int n, double perturb, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_square_mesh: n must be >= 1");
    if (!(perturb >= 0.0 && perturb <= 0.3))
        throw std::invalid_argument("generate_square_mesh: perturb must lie in [0, 0.3]");

    std::mt19937_64 gen(seed);
    const int np = n + 1;
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(np) * static_cast<std::size_t>(np));
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < np; ++i) {
            Vec2 p(static_cast<double>(i) / n, static_cast<double>(j) / n);
            const bool interior = i > 0 && i < n && j > 0 && j < n;
            if (interior) {
                const double theta = 2.0 * M_PI * detail::uniform01(gen);
                const double r = (perturb / n) * std::sqrt(detail::uniform01(gen));
                p += r * Vec2(std::cos(theta), std::sin(theta));
            }
            nodes.push_back(p);
        }
    }

    std::vector<Triangle> tris;
    tris.reserve(2u * static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    auto vid = [np](int i, int j) { return j * np + i; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            tris.push_back({{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}});
            tris.push_back({{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}});
        }
    }
    return Mesh(std::move(nodes), std::move(tris));
}

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        return true;
    }
    return false;
}

inline void expect_fully_consumed(std::istringstream& iss, int line_no) {
    std::string rest;
    if (iss.fail() || (iss >> rest && !rest.empty()))
        throw ParseError("mesh: line " + std::to_string(line_no) + ": malformed record");
}

}  // namespace detail

/// Parse the line-oriented mesh format:
///   nodes <N>      followed by N lines "x y"
///   triangles <M>  followed by M lines "i1 i2 i3" (0-based node indices)
/// '#' starts a comment. Triangle orientation is normalized on load.
inline Mesh load_mesh(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto require_line = [&](const char* what) {
        if (!detail::next_content_line(in, line, line_no))
            throw ParseError("mesh: line " + std::to_string(line_no + 1) + ": unexpected end of file, expected " +
                             std::string(what));
    };

    require_line("'nodes <count>'");
    std::string keyword;
    long nnodes = -1;
    {
        std::istringstream iss(line);
        iss >> keyword >> nnodes;
        if (iss.fail() || keyword != "nodes" || nnodes < 0)
            throw ParseError("mesh: line " + std::to_string(line_no) + ": expected 'nodes <count>'");
        detail::expect_fully_consumed(iss, line_no);
    }

    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>(nnodes));
    for (long i = 0; i < nnodes; ++i) {
        require_line("a node line 'x y'");
        std::istringstream iss(line);
        double x = 0, y = 0;
        iss >> x >> y;
        if (iss.fail())
            throw ParseError("mesh: line " + std::to_string(line_no) + ": expected two floating point coordinates");
        detail::expect_fully_consumed(iss, line_no);
        nodes.emplace_back(x, y);
    }

    require_line("'triangles <count>'");
    long ntris = -1;
    {
        std::istringstream iss(line);
        iss >> keyword >> ntris;
        if (iss.fail() || keyword != "triangles" || ntris < 0)
            throw ParseError("mesh: line " + std::to_string(line_no) + ": expected 'triangles <count>'");
        detail::expect_fully_consumed(iss, line_no);
    }

    std::vector<Triangle> tris;
    tris.reserve(static_cast<std::size_t>(ntris));
    for (long t = 0; t < ntris; ++t) {
        require_line("a triangle line 'i1 i2 i3'");
        std::istringstream iss(line);
        int a = -1, b = -1, c = -1;
        iss >> a >> b >> c;
        if (iss.fail())
            throw ParseError("mesh: line " + std::to_string(line_no) + ": expected three node indices");
        detail::expect_fully_consumed(iss, line_no);
        for (int v : {a, b, c})
            if (v < 0 || v >= static_cast<int>(nodes.size()))
                throw ParseError("mesh: line " + std::to_string(line_no) + ": node index " + std::to_string(v) +
                                 " out of range [0, " + std::to_string(nodes.size()) + ")");
        const double a2 = cross2(nodes[static_cast<std::size_t>(b)] - nodes[static_cast<std::size_t>(a)],
                                 nodes[static_cast<std::size_t>(c)] - nodes[static_cast<std::size_t>(a)]);
        if (a2 == 0.0)
            throw ParseError("mesh: line " + std::to_string(line_no) + ": triangle has zero area");
        tris.push_back({{a, b, c}});
    }
    if (detail::next_content_line(in, line, line_no))
        throw ParseError("mesh: line " + std::to_string(line_no) + ": unexpected content after triangle list");

    return Mesh(std::move(nodes), std::move(tris));
}

inline std::string write_mesh(const Mesh& mesh) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "nodes " << mesh.num_nodes() << "\n";
    for (const Vec2& p : mesh.nodes()) out << p.x() << " " << p.y() << "\n";
    out << "triangles " << mesh.num_triangles() << "\n";
    for (const Triangle& t : mesh.triangles()) out << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
    return out.str();
}

}  // namespace swfe
