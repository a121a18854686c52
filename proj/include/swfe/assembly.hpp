#pragma once

#include "swfe/elements.hpp"
#include "swfe/mesh.hpp"
#include "swfe/spaces.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace swfe {

enum class Symmetry { symmetric, skew, general };

/// Assembled bilinear form in compressed sparse form. Duplicate triplets are
/// summed on construction; the declared symmetry is verified against the
/// entries (tolerance 1e-13 relative to the largest entry).
class SparseOperator {
public:
    SparseOperator(int rows, int cols, const std::vector<Eigen::Triplet<double>>& entries, Symmetry sym)
        : mat_(rows, cols), sym_(sym) {
        mat_.setFromTriplets(entries.begin(), entries.end());
        mat_.makeCompressed();
        check_symmetry();
    }

    int rows() const { return static_cast<int>(mat_.rows()); }
    int cols() const { return static_cast<int>(mat_.cols()); }
    Symmetry symmetry() const { return sym_; }
    const Eigen::SparseMatrix<double>& matrix() const { return mat_; }
    int nonzeros() const { return static_cast<int>(mat_.nonZeros()); }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat_ * x; }
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const { return mat_.transpose() * x; }

    double max_abs() const {
        double m = 0.0;
        for (int k = 0; k < mat_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(mat_, k); it; ++it)
                m = std::max(m, std::abs(it.value()));
        return m;
    }

    Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }

private:
    void check_symmetry() {
        if (sym_ == Symmetry::general) return;
        const double sign = sym_ == Symmetry::symmetric ? -1.0 : 1.0;
        Eigen::SparseMatrix<double> d = mat_ + sign * Eigen::SparseMatrix<double>(mat_.transpose());
        double viol = 0.0;
        for (int k = 0; k < d.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
                viol = std::max(viol, std::abs(it.value()));
        if (viol > 1e-13 * max_abs())
            throw std::logic_error("SparseOperator: declared symmetry violated by " + std::to_string(viol));
    }

    Eigen::SparseMatrix<double> mat_;
    Symmetry sym_;
};

namespace detail {

struct BasisTab {
    Eigen::MatrixXd val;                                          // nq x nloc
    std::vector<Eigen::Matrix<double, Eigen::Dynamic, 2>> dref;   // per point: nloc x 2
};

inline BasisTab tabulate(const ReferenceBasis& basis, const QuadratureRule& quad) {
    BasisTab t;
    const int nq = static_cast<int>(quad.points.size());
    t.val.resize(nq, basis.node_count());
    t.dref.reserve(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) {
        t.val.row(q) = basis.eval(quad.points[static_cast<std::size_t>(q)]).transpose();
        t.dref.push_back(basis.grad(quad.points[static_cast<std::size_t>(q)]));
    }
    return t;
}

/// Local scalar mass matrix on element e: sum_q w_q phi_i phi_j |det J|.
inline Eigen::MatrixXd local_mass(const BasisTab& tab, const QuadratureRule& quad, double det) {
    const int nloc = static_cast<int>(tab.val.cols());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nloc, nloc);
    for (int q = 0; q < static_cast<int>(quad.points.size()); ++q)
        m += (quad.weights[static_cast<std::size_t>(q)] * det) * tab.val.row(q).transpose() * tab.val.row(q);
    return m;
}

}  // namespace detail

/// Quadrature degree at which every Galerkin integral of the pair is exact;
/// for PnDG-P(n+1) this is 2(n+1), driven by the elevation mass matrix.
inline int pair_quadrature_degree(const ElementPair& pair) {
    const int dv = pair.V.scalar().degree();
    const int dh = pair.H.degree();
    return std::max({2 * dh, 2 * dv, dv + dh});
}

/// Velocity mass matrix M_u, the form int w . u; block diagonal over elements
/// when V is discontinuous.
inline SparseOperator velocity_mass(const ElementPair& pair, int quad_degree = -1) {
    const ScalarSpace& S = pair.V.scalar();
    const Mesh& mesh = S.mesh();
    const QuadratureRule& quad = quadrature(quad_degree < 0 ? pair_quadrature_degree(pair) : quad_degree);
    const detail::BasisTab tab = detail::tabulate(S.basis(), quad);
    const int nloc = S.local_size();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(nloc * nloc) * 2);
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Eigen::MatrixXd m = detail::local_mass(tab, quad, mesh.affine_map(e).det);
        const auto dofs = S.element_dofs(e);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j)
                for (int c = 0; c < 2; ++c)
                    trip.emplace_back(2 * dofs[static_cast<std::size_t>(i)] + c,
                                      2 * dofs[static_cast<std::size_t>(j)] + c, m(i, j));
    }
    return SparseOperator(pair.V.ndof(), pair.V.ndof(), trip, Symmetry::symmetric);
}

/// Elevation mass matrix M_eta, the form int phi eta.
inline SparseOperator pressure_mass(const ElementPair& pair, int quad_degree = -1) {
    const ScalarSpace& H = pair.H;
    const Mesh& mesh = H.mesh();
    const QuadratureRule& quad = quadrature(quad_degree < 0 ? pair_quadrature_degree(pair) : quad_degree);
    const detail::BasisTab tab = detail::tabulate(H.basis(), quad);
    const int nloc = H.local_size();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(nloc * nloc));
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Eigen::MatrixXd m = detail::local_mass(tab, quad, mesh.affine_map(e).det);
        const auto dofs = H.element_dofs(e);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j)
                trip.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], m(i, j));
    }
    return SparseOperator(H.ndof(), H.ndof(), trip, Symmetry::symmetric);
}

/// Discrete gradient G with entries int w_i . grad(phi_a), mapping H
/// coefficients to the V dual. Its transpose realizes the integrated-by-parts
/// divergence int grad(phi) . u, so one matrix serves both equations.
inline SparseOperator gradient_op(const ElementPair& pair, int quad_degree = -1) {
    const ScalarSpace& S = pair.V.scalar();
    const ScalarSpace& H = pair.H;
    const Mesh& mesh = S.mesh();
    const QuadratureRule& quad = quadrature(quad_degree < 0 ? pair_quadrature_degree(pair) : quad_degree);
    const detail::BasisTab vtab = detail::tabulate(S.basis(), quad);
    const detail::BasisTab htab = detail::tabulate(H.basis(), quad);
    const int nv = S.local_size(), nh = H.local_size();
    const int nq = static_cast<int>(quad.points.size());

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(2 * nv * nh));
    Eigen::MatrixXd loc0(nv, nh), loc1(nv, nh);
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const AffineMap map = mesh.affine_map(e);
        const Eigen::Matrix2d jinv = map.inv_transpose.transpose();
        loc0.setZero();
        loc1.setZero();
        for (int q = 0; q < nq; ++q) {
            const double w = quad.weights[static_cast<std::size_t>(q)] * map.det;
            const Eigen::MatrixXd gh = htab.dref[static_cast<std::size_t>(q)] * jinv;  // nh x 2, physical grads
            loc0 += w * vtab.val.row(q).transpose() * gh.col(0).transpose();
            loc1 += w * vtab.val.row(q).transpose() * gh.col(1).transpose();
        }
        const auto vdofs = S.element_dofs(e);
        const auto hdofs = H.element_dofs(e);
        for (int i = 0; i < nv; ++i)
            for (int a = 0; a < nh; ++a) {
                trip.emplace_back(2 * vdofs[static_cast<std::size_t>(i)], hdofs[static_cast<std::size_t>(a)],
                                  loc0(i, a));
                trip.emplace_back(2 * vdofs[static_cast<std::size_t>(i)] + 1, hdofs[static_cast<std::size_t>(a)],
                                  loc1(i, a));
            }
    }
    return SparseOperator(pair.V.ndof(), H.ndof(), trip, Symmetry::general);
}

/// Rotation form C with entries int w_i . perp(w_j); skew since w.perp(v) = -v.perp(w).
inline SparseOperator coriolis_op(const ElementPair& pair, int quad_degree = -1) {
    const ScalarSpace& S = pair.V.scalar();
    const Mesh& mesh = S.mesh();
    const QuadratureRule& quad = quadrature(quad_degree < 0 ? pair_quadrature_degree(pair) : quad_degree);
    const detail::BasisTab tab = detail::tabulate(S.basis(), quad);
    const int nloc = S.local_size();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(nloc * nloc) * 2);
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const Eigen::MatrixXd m = detail::local_mass(tab, quad, mesh.affine_map(e).det);
        const auto dofs = S.element_dofs(e);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) {
                // perp maps (phi,0) to (0,phi) and (0,phi) to (-phi,0)
                trip.emplace_back(2 * dofs[static_cast<std::size_t>(i)] + 1,
                                  2 * dofs[static_cast<std::size_t>(j)], m(i, j));
                trip.emplace_back(2 * dofs[static_cast<std::size_t>(i)],
                                  2 * dofs[static_cast<std::size_t>(j)] + 1, -m(i, j));
            }
    }
    return SparseOperator(pair.V.ndof(), pair.V.ndof(), trip, Symmetry::skew);
}

/// Galerkin stiffness matrix K on H, the form int grad(phi) . grad(p).
inline SparseOperator stiffness(const ElementPair& pair, int quad_degree = -1) {
    const ScalarSpace& H = pair.H;
    const Mesh& mesh = H.mesh();
    const QuadratureRule& quad = quadrature(quad_degree < 0 ? pair_quadrature_degree(pair) : quad_degree);
    const detail::BasisTab tab = detail::tabulate(H.basis(), quad);
    const int nloc = H.local_size();
    const int nq = static_cast<int>(quad.points.size());

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(nloc * nloc));
    Eigen::MatrixXd k(nloc, nloc);
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const AffineMap map = mesh.affine_map(e);
        const Eigen::Matrix2d jinv = map.inv_transpose.transpose();
        k.setZero();
        for (int q = 0; q < nq; ++q) {
            const Eigen::MatrixXd gh = tab.dref[static_cast<std::size_t>(q)] * jinv;
            k += (quad.weights[static_cast<std::size_t>(q)] * map.det) * gh * gh.transpose();
        }
        const auto dofs = H.element_dofs(e);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j)
                trip.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], k(i, j));
    }
    return SparseOperator(H.ndof(), H.ndof(), trip, Symmetry::symmetric);
}

/// Matrix Market coordinate format, 1-based indices.
inline void write_matrix_market(const SparseOperator& op, std::ostream& out) {
    const auto& m = op.matrix();
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    out << std::setprecision(17);
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

inline std::string to_matrix_market(const SparseOperator& op) {
    std::ostringstream out;
    write_matrix_market(op, out);
    return out.str();
}

inline SparseOperator read_matrix_market(std::istream& in) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
    ++line_no;
    {
        std::istringstream iss(line);
        std::string banner, object, format, field, sym;
        iss >> banner >> object >> format >> field >> sym;
        if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate" || field != "real" ||
            sym != "general")
            throw ParseError("matrix market: line 1: expected header "
                             "'%%MatrixMarket matrix coordinate real general'");
    }
    long rows = -1, cols = -1, nnz = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream iss(line);
        iss >> rows >> cols >> nnz;
        if (iss.fail() || rows < 0 || cols < 0 || nnz < 0)
            throw ParseError("matrix market: line " + std::to_string(line_no) + ": expected 'rows cols nnz'");
        break;
    }
    if (rows < 0) throw ParseError("matrix market: missing size line");

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nnz));
    long seen = 0;
    while (seen < nnz) {
        if (!std::getline(in, line))
            throw ParseError("matrix market: line " + std::to_string(line_no + 1) + ": unexpected end of file");
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream iss(line);
        long i = 0, j = 0;
        double v = 0.0;
        iss >> i >> j >> v;
        if (iss.fail() || i < 1 || i > rows || j < 1 || j > cols)
            throw ParseError("matrix market: line " + std::to_string(line_no) + ": bad entry");
        trip.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
        ++seen;
    }
    return SparseOperator(static_cast<int>(rows), static_cast<int>(cols), trip, Symmetry::general);
}

inline SparseOperator read_matrix_market_text(const std::string& text) {
    std::istringstream in(text);
    return read_matrix_market(in);
}

}  // namespace swfe
