#pragma once

#include "swfe/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace swfe {

/// Symmetric Gaussian quadrature rule on the reference triangle
/// {(0,0),(1,0),(0,1)}. Weights are positive and sum to 1/2.
struct QuadratureRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
    int exact_degree = 0;
};

namespace detail {

struct QPoint {
    double x, y, w;
};

inline QuadratureRule make_rule(int exact_degree, std::initializer_list<QPoint> pts) {
    QuadratureRule r;
    r.exact_degree = exact_degree;
    for (const QPoint& p : pts) {
        r.points.emplace_back(p.x, p.y);
        r.weights.push_back(p.w);
    }
    return r;
}

inline const std::array<QuadratureRule, 6>& quadrature_table() {
    // Tabulated symmetric rules with positive weights; orbit parameters
    // refined to 50 digits against the moment equations.
    static const std::array<QuadratureRule, 6> rules = {
        make_rule(1, {{1.0 / 3.0, 1.0 / 3.0, 0.5}}),
        make_rule(2, {{1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0},
                      {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
                      {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}}),
        make_rule(4, {{0.4459484909159648863183, 0.4459484909159648863183, 0.1116907948390057328475},
                      {0.1081030181680702273633, 0.4459484909159648863183, 0.1116907948390057328475},
                      {0.4459484909159648863183, 0.1081030181680702273633, 0.1116907948390057328475},
                      {0.09157621350977074345957, 0.09157621350977074345957, 0.05497587182766093381916},
                      {0.8168475729804585130809, 0.09157621350977074345957, 0.05497587182766093381916},
                      {0.09157621350977074345957, 0.8168475729804585130809, 0.05497587182766093381916}}),
        make_rule(5, {{1.0 / 3.0, 1.0 / 3.0, 9.0 / 80.0},
                      {0.4701420641051150897704, 0.4701420641051150897704, 0.06619707639425309036882},
                      {0.05971587178976982045926, 0.4701420641051150897704, 0.06619707639425309036882},
                      {0.4701420641051150897704, 0.05971587178976982045926, 0.06619707639425309036882},
                      {0.1012865073234563388009, 0.1012865073234563388009, 0.06296959027241357629784},
                      {0.7974269853530873223981, 0.1012865073234563388009, 0.06296959027241357629784},
                      {0.1012865073234563388009, 0.7974269853530873223981, 0.06296959027241357629784}}),
        make_rule(6, {{0.2492867451709104212916, 0.2492867451709104212916, 0.05839313786318968301264},
                      {0.5014265096581791574167, 0.2492867451709104212916, 0.05839313786318968301264},
                      {0.2492867451709104212916, 0.5014265096581791574167, 0.05839313786318968301264},
                      {0.06308901449150222834033, 0.06308901449150222834033, 0.02542245318510340846047},
                      {0.8738219710169955433193, 0.06308901449150222834033, 0.02542245318510340846047},
                      {0.06308901449150222834033, 0.8738219710169955433193, 0.02542245318510340846047},
                      {0.3103524510337844054166, 0.6365024991213986472301, 0.04142553780918678759678},
                      {0.6365024991213986472301, 0.3103524510337844054166, 0.04142553780918678759678},
                      {0.05314504984481694735325, 0.3103524510337844054166, 0.04142553780918678759678},
                      {0.3103524510337844054166, 0.05314504984481694735325, 0.04142553780918678759678},
                      {0.05314504984481694735325, 0.6365024991213986472301, 0.04142553780918678759678},
                      {0.6365024991213986472301, 0.05314504984481694735325, 0.04142553780918678759678}}),
        make_rule(8, {{1.0 / 3.0, 1.0 / 3.0, 0.07215780383889358412555},
                      {0.4592925882927231560288, 0.4592925882927231560288, 0.04754581713364231239695},
                      {0.08141482341455368794237, 0.4592925882927231560288, 0.04754581713364231239695},
                      {0.4592925882927231560288, 0.08141482341455368794237, 0.04754581713364231239695},
                      {0.1705693077517602066223, 0.1705693077517602066223, 0.0516086852673591251409},
                      {0.6588613844964795867554, 0.1705693077517602066223, 0.0516086852673591251409},
                      {0.1705693077517602066223, 0.6588613844964795867554, 0.0516086852673591251409},
                      {0.05054722831703097545842, 0.05054722831703097545842, 0.01622924881159904015546},
                      {0.8989055433659380490832, 0.05054722831703097545842, 0.01622924881159904015546},
                      {0.05054722831703097545842, 0.8989055433659380490832, 0.01622924881159904015546},
                      {0.2631128296346381134218, 0.728492392955404281241, 0.01361515708721749713242},
                      {0.728492392955404281241, 0.2631128296346381134218, 0.01361515708721749713242},
                      {0.008394777409957605337214, 0.2631128296346381134218, 0.01361515708721749713242},
                      {0.2631128296346381134218, 0.008394777409957605337214, 0.01361515708721749713242},
                      {0.008394777409957605337214, 0.728492392955404281241, 0.01361515708721749713242},
                      {0.728492392955404281241, 0.008394777409957605337214, 0.01361515708721749713242}})};
    return rules;
}

}  // namespace detail

/// Smallest tabulated rule exact for polynomials of total degree <= degree.
inline const QuadratureRule& quadrature(int degree) {
    if (degree < 0 || degree > 8)
        throw std::invalid_argument("quadrature: requested degree " + std::to_string(degree) +
                                    " outside supported table [0, 8]");
    for (const QuadratureRule& r : detail::quadrature_table())
        if (r.exact_degree >= degree) return r;
    throw std::logic_error("quadrature: table exhausted");
}

/// Lagrange basis of degree k on the reference triangle. DOF points are the
/// lattice points (i/k, j/k), ordered: the three vertices (0,0),(1,0),(0,1),
/// then k-1 points per edge along edges (v0,v1),(v1,v2),(v2,v0), then interior
/// lattice points by rows (ascending j, then i). Degree 0 has a single DOF at
/// the centroid.
class ReferenceBasis {
public:
    explicit ReferenceBasis(int degree) : degree_(degree) {
        if (degree < 0 || degree > 4)
            throw std::invalid_argument("lagrange_basis: supported degrees are 0..4, got " + std::to_string(degree));
        build_lattice();
        build_monomials();
        build_coefficients();
    }

    int degree() const { return degree_; }
    int node_count() const { return static_cast<int>(dof_points_.size()); }
    const std::vector<Vec2>& dof_points() const { return dof_points_; }

    /// DOF index of lattice multi-index (i,j) with i+j <= degree; degree 0 maps (0,0) to 0.
    int lattice_dof(int i, int j) const {
        const int stride = degree_ + 1;
        const int idx = lattice_map_.at(static_cast<std::size_t>(j * stride + i));
        return idx;
    }

    Eigen::VectorXd eval(const Vec2& p) const { return coeff_.transpose() * monomials(p); }

    /// Reference gradients; row i holds grad of basis function i.
    Eigen::Matrix<double, Eigen::Dynamic, 2> grad(const Vec2& p) const {
        const int n = node_count();
        Eigen::VectorXd mx(n), my(n);
        for (int j = 0; j < n; ++j) {
            const auto [a, b] = exponents_[static_cast<std::size_t>(j)];
            mx[j] = a == 0 ? 0.0 : a * ipow(p.x(), a - 1) * ipow(p.y(), b);
            my[j] = b == 0 ? 0.0 : b * ipow(p.x(), a) * ipow(p.y(), b - 1);
        }
        Eigen::Matrix<double, Eigen::Dynamic, 2> g(n, 2);
        g.col(0) = coeff_.transpose() * mx;
        g.col(1) = coeff_.transpose() * my;
        return g;
    }

private:
    static double ipow(double x, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= x;
        return r;
    }

    Eigen::VectorXd monomials(const Vec2& p) const {
        const int n = node_count();
        Eigen::VectorXd m(n);
        for (int j = 0; j < n; ++j) {
            const auto [a, b] = exponents_[static_cast<std::size_t>(j)];
            m[j] = ipow(p.x(), a) * ipow(p.y(), b);
        }
        return m;
    }

    void build_lattice() {
        const int k = degree_;
        if (k == 0) {
            dof_points_.emplace_back(1.0 / 3.0, 1.0 / 3.0);
            lattice_map_ = {0};
            return;
        }
        const int stride = k + 1;
        lattice_map_.assign(static_cast<std::size_t>(stride) * static_cast<std::size_t>(stride), -1);
        auto push = [&](int i, int j) {
            lattice_map_[static_cast<std::size_t>(j * stride + i)] = static_cast<int>(dof_points_.size());
            dof_points_.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
        };
        push(0, 0);
        push(k, 0);
        push(0, k);
        for (int i = 1; i < k; ++i) push(i, 0);          // edge v0->v1
        for (int i = 1; i < k; ++i) push(k - i, i);      // edge v1->v2
        for (int i = 1; i < k; ++i) push(0, k - i);      // edge v2->v0
        for (int j = 1; j < k; ++j)
            for (int i = 1; i + j < k; ++i) push(i, j);  // interior
    }

    void build_monomials() {
        for (int d = 0; d <= degree_; ++d)
            for (int a = d; a >= 0; --a) exponents_.push_back({a, d - a});
    }

    void build_coefficients() {
        const int n = node_count();
        Eigen::MatrixXd vand(n, n);
        for (int i = 0; i < n; ++i) vand.row(i) = monomials(dof_points_[static_cast<std::size_t>(i)]).transpose();
        coeff_ = vand.fullPivLu().inverse();
    }

    int degree_;
    std::vector<Vec2> dof_points_;
    std::vector<std::array<int, 2>> exponents_;
    std::vector<int> lattice_map_;
    Eigen::MatrixXd coeff_;  // column i: monomial coefficients of basis function i
};

inline ReferenceBasis lagrange_basis(int degree) { return ReferenceBasis(degree); }

}  // namespace swfe
