#pragma once

#include "swfe/elements.hpp"
#include "swfe/mesh.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace swfe {

enum class Continuity { continuous, discontinuous };

/// Scalar finite element space of elementwise polynomials on a mesh.
/// Continuous spaces share DOFs across element interfaces (nodes, then edge
/// points, then per-element interior points); discontinuous spaces number all
/// DOFs per element. Boundary DOFs are the ones whose point lies on a boundary
/// edge (geometric test, tolerance 1e-12).
class ScalarSpace {
public:
    ScalarSpace(const Mesh& mesh, int degree, Continuity continuity)
        : mesh_(&mesh), degree_(degree), continuity_(continuity), basis_(degree) {
        if (continuity == Continuity::continuous && degree < 1)
            throw std::invalid_argument("ScalarSpace: continuous spaces require degree >= 1");
        if (continuity == Continuity::continuous)
            build_continuous();
        else
            build_discontinuous();
        find_boundary_dofs();
    }

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    Continuity continuity() const { return continuity_; }
    const ReferenceBasis& basis() const { return basis_; }
    int ndof() const { return ndof_; }
    int local_size() const { return basis_.node_count(); }

    std::span<const int> element_dofs(int elem) const {
        const int nloc = local_size();
        return {dof_map_.data() + static_cast<std::size_t>(elem) * static_cast<std::size_t>(nloc),
                static_cast<std::size_t>(nloc)};
    }

    const std::vector<Vec2>& dof_coords() const { return dof_coords_; }
    const std::vector<int>& boundary_dofs() const { return boundary_dofs_; }
    bool is_boundary_dof(int g) const { return boundary_mask_[static_cast<std::size_t>(g)] != 0; }

    double evaluate(const Eigen::VectorXd& coeffs, int elem, const Vec2& ref) const {
        const Eigen::VectorXd phi = basis_.eval(ref);
        const auto dofs = element_dofs(elem);
        double v = 0.0;
        for (int i = 0; i < local_size(); ++i) v += coeffs[dofs[static_cast<std::size_t>(i)]] * phi[i];
        return v;
    }

    /// Physical gradient of the field at a reference point of an element.
    Vec2 evaluate_gradient(const Eigen::VectorXd& coeffs, int elem, const Vec2& ref) const {
        const auto g = basis_.grad(ref);
        const auto dofs = element_dofs(elem);
        Vec2 ref_grad = Vec2::Zero();
        for (int i = 0; i < local_size(); ++i)
            ref_grad += coeffs[dofs[static_cast<std::size_t>(i)]] * g.row(i).transpose();
        return mesh_->affine_map(elem).to_physical_gradient(ref_grad);
    }

    /// Lagrange interpolation: coefficients are point values at the DOF points.
    Eigen::VectorXd interpolate(const std::function<double(const Vec2&)>& f) const {
        Eigen::VectorXd c(ndof_);
        for (int g = 0; g < ndof_; ++g) c[g] = f(dof_coords_[static_cast<std::size_t>(g)]);
        return c;
    }

private:
    void build_continuous() {
        const int k = degree_;
        const int nloc = basis_.node_count();
        const int nedge_pts = k - 1;
        const int nint = nloc - 3 - 3 * nedge_pts;
        const int edge_base = mesh_->num_nodes();
        const int int_base = edge_base + mesh_->num_edges() * nedge_pts;
        ndof_ = int_base + mesh_->num_triangles() * nint;
        dof_map_.resize(static_cast<std::size_t>(mesh_->num_triangles()) * static_cast<std::size_t>(nloc));
        dof_coords_.assign(static_cast<std::size_t>(ndof_), Vec2::Zero());

        static constexpr int edge_verts[3][2] = {{0, 1}, {1, 2}, {2, 0}};
        for (int e = 0; e < mesh_->num_triangles(); ++e) {
            const auto& tri = mesh_->triangles()[static_cast<std::size_t>(e)].v;
            int* dofs = dof_map_.data() + static_cast<std::size_t>(e) * static_cast<std::size_t>(nloc);
            for (int v = 0; v < 3; ++v) dofs[v] = tri[static_cast<std::size_t>(v)];
            for (int le = 0; le < 3; ++le) {
                const int ga = tri[static_cast<std::size_t>(edge_verts[le][0])];
                const int gb = tri[static_cast<std::size_t>(edge_verts[le][1])];
                const EdgeRecord& rec = mesh_->edge_table().at(std::minmax(ga, gb));
                const int base = edge_base + rec.id * nedge_pts;
                const bool forward = ga < gb;
                for (int j = 0; j < nedge_pts; ++j)
                    dofs[3 + le * nedge_pts + j] = base + (forward ? j : nedge_pts - 1 - j);
            }
            for (int t = 0; t < nint; ++t) dofs[3 + 3 * nedge_pts + t] = int_base + e * nint + t;

            const AffineMap map = mesh_->affine_map(e);
            for (int i = 0; i < nloc; ++i) {
                const int g = dofs[i];
                dof_coords_[static_cast<std::size_t>(g)] =
                    i < 3 ? mesh_->nodes()[static_cast<std::size_t>(tri[static_cast<std::size_t>(i)])]
                          : map.apply(basis_.dof_points()[static_cast<std::size_t>(i)]);
            }
        }
    }

    void build_discontinuous() {
        const int nloc = basis_.node_count();
        ndof_ = mesh_->num_triangles() * nloc;
        dof_map_.resize(static_cast<std::size_t>(ndof_));
        dof_coords_.assign(static_cast<std::size_t>(ndof_), Vec2::Zero());
        for (int e = 0; e < mesh_->num_triangles(); ++e) {
            const AffineMap map = mesh_->affine_map(e);
            for (int i = 0; i < nloc; ++i) {
                const int g = e * nloc + i;
                dof_map_[static_cast<std::size_t>(g)] = g;
                dof_coords_[static_cast<std::size_t>(g)] = map.apply(basis_.dof_points()[static_cast<std::size_t>(i)]);
            }
        }
    }

    void find_boundary_dofs() {
        boundary_mask_.assign(static_cast<std::size_t>(ndof_), 0);
        for (int g = 0; g < ndof_; ++g) {
            if (mesh_->on_boundary(dof_coords_[static_cast<std::size_t>(g)])) {
                boundary_mask_[static_cast<std::size_t>(g)] = 1;
                boundary_dofs_.push_back(g);
            }
        }
    }

    const Mesh* mesh_;
    int degree_;
    Continuity continuity_;
    ReferenceBasis basis_;
    int ndof_ = 0;
    std::vector<int> dof_map_;
    std::vector<Vec2> dof_coords_;
    std::vector<int> boundary_dofs_;
    std::vector<std::uint8_t> boundary_mask_;
};

inline ScalarSpace build_scalar_space(const Mesh& mesh, int degree, Continuity continuity) {
    return ScalarSpace(mesh, degree, continuity);
}

inline Eigen::VectorXd interpolate_scalar(const ScalarSpace& space, const std::function<double(const Vec2&)>& f) {
    return space.interpolate(f);
}

/// Vector-valued space: two copies of a scalar space with one shared
/// continuity rule. Component c of scalar DOF g lives at index 2*g + c.
class VectorSpace {
public:
    VectorSpace(const Mesh& mesh, int degree, Continuity continuity) : scalar_(mesh, degree, continuity) {}

    const ScalarSpace& scalar() const { return scalar_; }
    int ndof() const { return 2 * scalar_.ndof(); }

    Vec2 evaluate(const Eigen::VectorXd& coeffs, int elem, const Vec2& ref) const {
        const Eigen::VectorXd phi = scalar_.basis().eval(ref);
        const auto dofs = scalar_.element_dofs(elem);
        Vec2 v = Vec2::Zero();
        for (int i = 0; i < scalar_.local_size(); ++i) {
            const int g = dofs[static_cast<std::size_t>(i)];
            v.x() += coeffs[2 * g] * phi[i];
            v.y() += coeffs[2 * g + 1] * phi[i];
        }
        return v;
    }

    Eigen::VectorXd interpolate(const std::function<Vec2(const Vec2&)>& f) const {
        Eigen::VectorXd c(ndof());
        for (int g = 0; g < scalar_.ndof(); ++g) {
            const Vec2 v = f(scalar_.dof_coords()[static_cast<std::size_t>(g)]);
            c[2 * g] = v.x();
            c[2 * g + 1] = v.y();
        }
        return c;
    }

    /// Interpolate a mesh function given per element in reference coordinates.
    /// Only meaningful for discontinuous spaces, where every DOF belongs to
    /// exactly one element.
    Eigen::VectorXd interpolate_elementwise(const std::function<Vec2(int, const Vec2&)>& f) const {
        if (scalar_.continuity() != Continuity::discontinuous)
            throw std::invalid_argument("interpolate_elementwise: requires a discontinuous space");
        Eigen::VectorXd c(ndof());
        const auto& pts = scalar_.basis().dof_points();
        for (int e = 0; e < scalar_.mesh().num_triangles(); ++e) {
            const auto dofs = scalar_.element_dofs(e);
            for (int i = 0; i < scalar_.local_size(); ++i) {
                const Vec2 v = f(e, pts[static_cast<std::size_t>(i)]);
                const int g = dofs[static_cast<std::size_t>(i)];
                c[2 * g] = v.x();
                c[2 * g + 1] = v.y();
            }
        }
        return c;
    }

private:
    ScalarSpace scalar_;
};

/// A mixed pair: elevation space H and velocity space V, with the two
/// embedding flags. embeds_gradient says elementwise gradients of H fields lie
/// in V; closed_under_perp says 90-degree rotation maps V into itself.
struct ElementPair {
    std::string name;
    ScalarSpace H;
    VectorSpace V;
    bool embeds_gradient = false;
    bool closed_under_perp = true;
};

inline bool is_known_pair(const std::string& name) {
    return name == "P0-P1" || name == "P1DG-P2" || name == "P2DG-P3" || name == "P1-P1";
}

/// Supported pairs: P0-P1, P1DG-P2, P2DG-P3 (the discontinuous-velocity
/// sequence) and P1-P1 (equal order, kept as a negative control).
inline ElementPair make_element_pair(const std::string& name, const Mesh& mesh) {
    int v_degree = 0, h_degree = 1;
    Continuity v_cont = Continuity::discontinuous;
    if (name == "P0-P1") {
        v_degree = 0;
        h_degree = 1;
    } else if (name == "P1DG-P2") {
        v_degree = 1;
        h_degree = 2;
    } else if (name == "P2DG-P3") {
        v_degree = 2;
        h_degree = 3;
    } else if (name == "P1-P1") {
        v_degree = 1;
        h_degree = 1;
        v_cont = Continuity::continuous;
    } else {
        throw std::invalid_argument("make_element_pair: unknown pair '" + name +
                                    "' (expected P0-P1, P1DG-P2, P2DG-P3 or P1-P1)");
    }
    ElementPair pair{name, ScalarSpace(mesh, h_degree, Continuity::continuous),
                     VectorSpace(mesh, v_degree, v_cont), false, true};
    pair.embeds_gradient = v_cont == Continuity::discontinuous && v_degree >= h_degree - 1;
    return pair;
}

}  // namespace swfe
