#pragma once

#include "swfe/assembly.hpp"
#include "swfe/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace swfe {

/// L2 norm of the difference between a scalar field and an analytic function.
inline double l2_error_scalar(const ScalarSpace& H, const Eigen::VectorXd& coeffs,
                              const std::function<double(const Vec2&)>& exact, int quad_degree = 8) {
    const QuadratureRule& quad = quadrature(quad_degree);
    double err2 = 0.0;
    for (int e = 0; e < H.mesh().num_triangles(); ++e) {
        const AffineMap map = H.mesh().affine_map(e);
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
            const double d = H.evaluate(coeffs, e, quad.points[q]) - exact(map.apply(quad.points[q]));
            err2 += quad.weights[q] * map.det * d * d;
        }
    }
    return std::sqrt(std::max(err2, 0.0));
}

inline double l2_error_vector(const VectorSpace& V, const Eigen::VectorXd& coeffs,
                              const std::function<Vec2(const Vec2&)>& exact, int quad_degree = 8) {
    const QuadratureRule& quad = quadrature(quad_degree);
    double err2 = 0.0;
    for (int e = 0; e < V.scalar().mesh().num_triangles(); ++e) {
        const AffineMap map = V.scalar().mesh().affine_map(e);
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
            const Vec2 d = V.evaluate(coeffs, e, quad.points[q]) - exact(map.apply(quad.points[q]));
            err2 += quad.weights[q] * map.det * d.squaredNorm();
        }
    }
    return std::sqrt(std::max(err2, 0.0));
}

/// L2 norm of the elementwise gradient of an H field.
inline double gradient_l2_norm(const ScalarSpace& H, const Eigen::VectorXd& eta, int quad_degree = 8) {
    const QuadratureRule& quad = quadrature(quad_degree);
    double n2 = 0.0;
    for (int e = 0; e < H.mesh().num_triangles(); ++e) {
        const AffineMap map = H.mesh().affine_map(e);
        for (std::size_t q = 0; q < quad.points.size(); ++q)
            n2 += quad.weights[q] * map.det * H.evaluate_gradient(eta, e, quad.points[q]).squaredNorm();
    }
    return std::sqrt(std::max(n2, 0.0));
}

/// || M_u^{-1} G eta - grad eta ||_L2: the discrete gradient against the
/// elementwise strong gradient. Vanishes (to round-off) exactly when gradients
/// of H embed in V.
inline double pointwise_gradient_error(const ElementPair& pair, const Eigen::VectorXd& eta) {
    const SparseOperator Mu = velocity_mass(pair);
    const SparseOperator G = gradient_op(pair);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Mu.matrix());
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("pointwise_gradient_error: mass factorization failed");
    const Eigen::VectorXd q = ldlt.solve(G.matrix() * eta);

    const QuadratureRule& quad = quadrature(pair_quadrature_degree(pair));
    double err2 = 0.0;
    for (int e = 0; e < pair.H.mesh().num_triangles(); ++e) {
        const AffineMap map = pair.H.mesh().affine_map(e);
        for (std::size_t k = 0; k < quad.points.size(); ++k) {
            const Vec2 d = pair.V.evaluate(q, e, quad.points[k]) -
                           pair.H.evaluate_gradient(eta, e, quad.points[k]);
            err2 += quad.weights[k] * map.det * d.squaredNorm();
        }
    }
    return std::sqrt(std::max(err2, 0.0));
}

namespace detail {

/// Second-smallest eigenvalue of the pencil (A, B), i.e. the smallest after
/// deflating the one-dimensional constant kernel.
inline double second_smallest_eig(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), b);
    if (es.info() != Eigen::Success) throw std::runtime_error("generalized eigensolver failed");
    return es.eigenvalues()[1];
}

inline double lsq_order(const std::vector<double>& h, const std::vector<double>& err) {
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(h[static_cast<std::size_t>(i)]);
        const double y = std::log(err[static_cast<std::size_t>(i)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Inf-sup constant beta_h: sqrt of the smallest generalized eigenvalue of
/// (G^T M_u^{-1} G, M_eta) on the complement of constants. Dense eigensolve;
/// H must have at most 2000 DOFs.
inline double infsup_constant(const ElementPair& pair) {
    if (pair.H.ndof() > 2000)
        throw std::invalid_argument("infsup_constant: dense eigensolve limited to H ndof <= 2000");
    const SparseOperator Mu = velocity_mass(pair);
    const SparseOperator G = gradient_op(pair);
    const SparseOperator Meta = pressure_mass(pair);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Mu.matrix());
    if (llt.info() != Eigen::Success) throw std::runtime_error("infsup_constant: mass factorization failed");
    const Eigen::MatrixXd gd = G.dense();
    const Eigen::MatrixXd a = gd.transpose() * llt.solve(gd);
    return std::sqrt(std::max(detail::second_smallest_eig(a, Meta.dense()), 0.0));
}

/// Smallest nonzero generalized eigenvalue of (K, M_eta): the discrete
/// counterpart of the first nonzero Neumann eigenvalue of -Laplace.
inline double laplacian_min_eig(const ElementPair& pair) {
    if (pair.H.ndof() > 2000)
        throw std::invalid_argument("laplacian_min_eig: dense eigensolve limited to H ndof <= 2000");
    return detail::second_smallest_eig(stiffness(pair).dense(), pressure_mass(pair).dense());
}

/// || G^T M_u^{-1} G - K ||_max. For embedding pairs the composed operator
/// collapses to the Galerkin stiffness, so this is zero up to round-off; the
/// block-diagonal mass is inverted elementwise when V is discontinuous.
inline double poisson_sparsity_check(const ElementPair& pair) {
    const SparseOperator K = stiffness(pair);
    Eigen::SparseMatrix<double> composed;

    if (pair.V.scalar().continuity() == Continuity::discontinuous) {
        const ScalarSpace& S = pair.V.scalar();
        const ScalarSpace& H = pair.H;
        const Mesh& mesh = S.mesh();
        const QuadratureRule& quad = quadrature(pair_quadrature_degree(pair));
        const detail::BasisTab vtab = detail::tabulate(S.basis(), quad);
        const detail::BasisTab htab = detail::tabulate(H.basis(), quad);
        const int nv = S.local_size(), nh = H.local_size();
        const int nq = static_cast<int>(quad.points.size());

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * static_cast<std::size_t>(nh * nh));
        Eigen::MatrixXd g0(nv, nh), g1(nv, nh);
        for (int e = 0; e < mesh.num_triangles(); ++e) {
            const AffineMap map = mesh.affine_map(e);
            const Eigen::Matrix2d jinv = map.inv_transpose.transpose();
            const Eigen::MatrixXd ms = detail::local_mass(vtab, quad, map.det);
            g0.setZero();
            g1.setZero();
            for (int q = 0; q < nq; ++q) {
                const double w = quad.weights[static_cast<std::size_t>(q)] * map.det;
                const Eigen::MatrixXd gh = htab.dref[static_cast<std::size_t>(q)] * jinv;
                g0 += w * vtab.val.row(q).transpose() * gh.col(0).transpose();
                g1 += w * vtab.val.row(q).transpose() * gh.col(1).transpose();
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(ms);
            const Eigen::MatrixXd local = g0.transpose() * ldlt.solve(g0) + g1.transpose() * ldlt.solve(g1);
            const auto hdofs = H.element_dofs(e);
            for (int a = 0; a < nh; ++a)
                for (int b = 0; b < nh; ++b)
                    trip.emplace_back(hdofs[static_cast<std::size_t>(a)], hdofs[static_cast<std::size_t>(b)],
                                      local(a, b));
        }
        composed.resize(pair.H.ndof(), pair.H.ndof());
        composed.setFromTriplets(trip.begin(), trip.end());
    } else {
        const SparseOperator Mu = velocity_mass(pair);
        const SparseOperator G = gradient_op(pair);
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Mu.matrix());
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("poisson_sparsity_check: mass factorization failed");
        const Eigen::MatrixXd gd = G.dense();
        composed = (gd.transpose() * llt.solve(gd)).sparseView();
    }

    Eigen::SparseMatrix<double> diff = composed - K.matrix();
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

struct SpectrumReport {
    Eigen::VectorXd omega;              // imaginary parts, ascending
    double max_omega = 0.0;
    double max_real = 0.0;              // largest |Re| over all eigenvalues
    int zero_modes = 0;                 // eigenvalues with |mu| < 1e-10 max|mu|
    int interior_h_dofs = 0;
    double op_norm_inf = 0.0;           // max absolute row sum of the block operator
    double max_balanced_residual = 0.0; // max over sampled balanced states of |B x| / (|B| |x|), inf norms
};

/// Dense spectrum of the semi-discrete generator. The eigenproblem is posed as
/// B x = mu M x with B = [[-f C, -g G], [g G^T, 0]] (skew-symmetric) and
/// M = blockdiag(M_u, (g/dbar) M_eta) (the energy inner product), which is
/// similar to the time-stepping generator, so the eigenvalues are purely
/// imaginary and balanced states span part of the kernel.
inline SpectrumReport compute_spectrum(const ElementPair& pair, const ModelParams& params, int nbalanced = 5,
                                       std::uint64_t seed0 = 1) {
    const int nv = pair.V.ndof();
    const int nh = pair.H.ndof();
    const int n = nv + nh;
    if (n > 4000) throw std::invalid_argument("compute_spectrum: dense eigensolve limited to 4000 DOFs");

    const SparseOperator Mu = velocity_mass(pair);
    const SparseOperator Meta = pressure_mass(pair);
    const SparseOperator G = gradient_op(pair);
    const SparseOperator C = coriolis_op(pair);

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    b.topLeftCorner(nv, nv) = -params.f * C.dense();
    b.topRightCorner(nv, nh) = -params.g * G.dense();
    b.bottomLeftCorner(nh, nv) = params.g * G.dense().transpose();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m.topLeftCorner(nv, nv) = Mu.dense();
    m.bottomRightCorner(nh, nh) = (params.g / params.dbar) * Meta.dense();

    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw std::runtime_error("compute_spectrum: mass Cholesky failed");
    const Eigen::MatrixXd t = llt.matrixL().solve(b);
    const Eigen::MatrixXd s = llt.matrixL().solve(t.transpose()).transpose();

    Eigen::EigenSolver<Eigen::MatrixXd> es(s, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("compute_spectrum: eigensolver failed");

    SpectrumReport rep;
    rep.omega.resize(n);
    double max_mu = 0.0;
    for (int i = 0; i < n; ++i) {
        rep.omega[i] = es.eigenvalues()[i].imag();
        rep.max_real = std::max(rep.max_real, std::abs(es.eigenvalues()[i].real()));
        max_mu = std::max(max_mu, std::abs(es.eigenvalues()[i]));
    }
    std::sort(rep.omega.data(), rep.omega.data() + n);
    rep.max_omega = max_mu;
    for (int i = 0; i < n; ++i)
        if (std::abs(es.eigenvalues()[i]) < 1e-10 * max_mu) ++rep.zero_modes;
    rep.interior_h_dofs = nh - static_cast<int>(pair.H.boundary_dofs().size());

    for (int i = 0; i < n; ++i) rep.op_norm_inf = std::max(rep.op_norm_inf, b.row(i).lpNorm<1>());
    for (int k = 0; k < nbalanced; ++k) {
        const State st = random_initial_state(pair, params, seed0 + static_cast<std::uint64_t>(k));
        Eigen::VectorXd x(n);
        x.head(nv) = st.u;
        x.tail(nh) = st.eta;
        const double res = (b * x).lpNorm<Eigen::Infinity>() /
                           (rep.op_norm_inf * x.lpNorm<Eigen::Infinity>());
        rep.max_balanced_residual = std::max(rep.max_balanced_residual, res);
    }
    return rep;
}

struct InfSupReport {
    std::string pair_name;
    std::vector<int> ns;
    std::vector<double> h, beta, lambda_min;
};

/// beta_h and lambda_min_h over a refinement sequence of perturbed unit
/// square meshes.
inline InfSupReport infsup_sweep(const std::string& pair_name, const std::vector<int>& ns, double perturb,
                                 std::uint64_t mesh_seed) {
    InfSupReport rep;
    rep.pair_name = pair_name;
    for (int n : ns) {
        const Mesh mesh = generate_square_mesh(n, perturb, mesh_seed);
        const ElementPair pair = make_element_pair(pair_name, mesh);
        rep.ns.push_back(n);
        rep.h.push_back(mesh.max_edge_length());
        rep.beta.push_back(infsup_constant(pair));
        rep.lambda_min.push_back(laplacian_min_eig(pair));
    }
    return rep;
}

struct ConvergenceReport {
    std::string pair_name;
    std::vector<int> ns;
    std::vector<double> h, err_u, err_eta;
    double order_u = 0.0, order_eta = 0.0;
};

/// Non-rotating standing wave on the unit square:
///   eta = cos(pi x) cos(pi y) cos(omega t),
///   u   = (g pi / omega) (sin(pi x) cos(pi y), cos(pi x) sin(pi y)) sin(omega t),
/// with omega = pi sqrt(2 g dbar), which satisfies u.n = 0 on the boundary.
/// Integrates to time T with dt ~ h^2/10 so the time error is negligible, and
/// reports L2 errors and the least-squares observed orders.
inline ConvergenceReport convergence_study(const std::string& pair_name, const std::vector<int>& ns,
                                           double perturb, std::uint64_t mesh_seed, double g = 1.0,
                                           double dbar = 1.0, double T = 0.5) {
    ConvergenceReport rep;
    rep.pair_name = pair_name;
    const double omega = M_PI * std::sqrt(2.0 * g * dbar);
    auto eta_exact = [omega](const Vec2& p, double t) {
        return std::cos(M_PI * p.x()) * std::cos(M_PI * p.y()) * std::cos(omega * t);
    };
    auto u_exact = [omega, g](const Vec2& p, double t) {
        const double amp = (g * M_PI / omega) * std::sin(omega * t);
        return Vec2(amp * std::sin(M_PI * p.x()) * std::cos(M_PI * p.y()),
                    amp * std::cos(M_PI * p.x()) * std::sin(M_PI * p.y()));
    };

    for (int n : ns) {
        const Mesh mesh = generate_square_mesh(n, perturb, mesh_seed);
        const ElementPair pair = make_element_pair(pair_name, mesh);
        const double h = mesh.max_edge_length();

        ModelParams params;
        params.f = 0.0;
        params.g = g;
        params.dbar = dbar;
        params.nsteps = std::max(1, static_cast<int>(std::ceil(T / (h * h / 10.0))));
        params.dt = T / params.nsteps;

        const MidpointStepper stepper(pair, params);
        State s{pair.V.interpolate([&](const Vec2& p) { return u_exact(p, 0.0); }),
                pair.H.interpolate([&](const Vec2& p) { return eta_exact(p, 0.0); }), 0.0};
        for (int i = 0; i < params.nsteps; ++i) s = stepper.step(s);

        rep.ns.push_back(n);
        rep.h.push_back(h);
        rep.err_eta.push_back(l2_error_scalar(pair.H, s.eta, [&](const Vec2& p) { return eta_exact(p, T); }));
        rep.err_u.push_back(l2_error_vector(pair.V, s.u, [&](const Vec2& p) { return u_exact(p, T); }));
    }
    rep.order_eta = detail::lsq_order(rep.h, rep.err_eta);
    rep.order_u = detail::lsq_order(rep.h, rep.err_u);
    return rep;
}

}  // namespace swfe
