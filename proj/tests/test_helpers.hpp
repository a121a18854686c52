#pragma once

#include "swfe/swfe.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace swfe::testing {

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
inline double monomial_integral(int a, int b) {
    auto fact = [](int n) {
        double r = 1.0;
        for (int i = 2; i <= n; ++i) r *= i;
        return r;
    };
    return fact(a) * fact(b) / fact(a + b + 2);
}

/// Independent reference mass matrix oracle: rebuild the Lagrange basis from
/// its interpolation conditions (Vandermonde solve in the test) and integrate
/// the monomial products with the closed form, bypassing quadrature entirely.
inline Eigen::MatrixXd exact_reference_mass(int degree) {
    const ReferenceBasis basis(degree);
    const int n = basis.node_count();
    std::vector<std::pair<int, int>> expo;
    for (int d = 0; d <= degree; ++d)
        for (int a = d; a >= 0; --a) expo.emplace_back(a, d - a);

    Eigen::MatrixXd vand(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            vand(i, j) = std::pow(basis.dof_points()[static_cast<std::size_t>(i)].x(), expo[static_cast<std::size_t>(j)].first) *
                         std::pow(basis.dof_points()[static_cast<std::size_t>(i)].y(), expo[static_cast<std::size_t>(j)].second);
    const Eigen::MatrixXd coeff = vand.fullPivLu().inverse();  // column i: coeffs of basis i

    // moment matrix of the monomials
    Eigen::MatrixXd mom(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            mom(p, q) = monomial_integral(expo[static_cast<std::size_t>(p)].first + expo[static_cast<std::size_t>(q)].first,
                                          expo[static_cast<std::size_t>(p)].second + expo[static_cast<std::size_t>(q)].second);
    return coeff.transpose() * mom * coeff;
}

/// Central finite differences of a scalar function of two variables.
template <typename F>
Vec2 fd_gradient(const F& f, const Vec2& p, double step = 1e-5) {
    return Vec2((f(Vec2(p.x() + step, p.y())) - f(Vec2(p.x() - step, p.y()))) / (2 * step),
                (f(Vec2(p.x(), p.y() + step)) - f(Vec2(p.x(), p.y() - step))) / (2 * step));
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

/// Random point strictly inside the reference triangle.
inline Vec2 random_interior_point(std::mt19937_64& gen) {
    double x = uniform(gen, 0.05, 0.9);
    double y = uniform(gen, 0.05, 0.9);
    if (x + y > 0.95) {
        x = 0.95 - x;
        y = 0.95 - y;
    }
    return Vec2(x, y);
}

inline Eigen::VectorXd random_coeffs(int n, std::uint64_t seed) {
    auto gen = rng(seed);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(gen, -1.0, 1.0);
    return v;
}

}  // namespace swfe::testing
