#pragma once

#include "swfe/assembly.hpp"
#include "swfe/spaces.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace swfe {

/// Dimensionless model parameters for the linear rotating shallow-water
/// system: f Coriolis, g gravity, dbar mean depth.
struct ModelParams {
    double f = 10.0;
    double g = 1.0;
    double dbar = 1.0;
    double dt = 0.01;
    int nsteps = 1000;
};

/// Scaling convention: unit length and velocity scales, so f = 1/Ro,
/// g = 1/Fr^2, dbar = 1.
inline ModelParams params_from_ro_fr(double ro, double fr) {
    if (!(ro > 0.0) || !(fr > 0.0))
        throw std::invalid_argument("params_from_ro_fr: Ro and Fr must be positive");
    ModelParams p;
    p.f = 1.0 / ro;
    p.g = 1.0 / (fr * fr);
    p.dbar = 1.0;
    return p;
}

struct State {
    Eigen::VectorXd u;    // velocity coefficients on V
    Eigen::VectorXd eta;  // elevation coefficients on H
    double time = 0.0;
};

enum class SolverKind { direct, iterative };

/// Elevation field with zero boundary DOFs and iid uniform [-1,1] interior
/// DOFs, drawn in DOF order from a seeded generator.
inline Eigen::VectorXd random_surface(const ScalarSpace& H, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(H.ndof());
    for (int g = 0; g < H.ndof(); ++g)
        if (!H.is_boundary_dof(g)) eta[g] = 2.0 * detail::uniform01(gen) - 1.0;
    return eta;
}

/// Pointwise balanced velocity u = (g/f) perp(grad eta), interpolated
/// elementwise into V. Exact in V when the pair satisfies both embedding
/// conditions, which is required here.
inline Eigen::VectorXd balanced_velocity(const ElementPair& pair, const Eigen::VectorXd& eta,
                                         const ModelParams& params) {
    if (!pair.embeds_gradient || !pair.closed_under_perp)
        throw std::invalid_argument("balanced_velocity: pair '" + pair.name +
                                    "' does not satisfy the embedding conditions; use project_balanced");
    if (!(params.f > 0.0)) throw std::invalid_argument("balanced_velocity: requires f > 0");
    const double s = params.g / params.f;
    return pair.V.interpolate_elementwise(
        [&](int e, const Vec2& ref) { return Vec2(s * perp(pair.H.evaluate_gradient(eta, e, ref))); });
}

inline State random_balanced_state(const ElementPair& pair, const ModelParams& params, std::uint64_t seed) {
    Eigen::VectorXd eta = random_surface(pair.H, seed);
    return State{balanced_velocity(pair, eta, params), std::move(eta), 0.0};
}

/// Weak balance: solve f C u = -g G eta. C is nonsingular for componentwise
/// vector spaces, so this is the M_u-weighted projection of the balance
/// relation; it coincides with the pointwise construction for embedding pairs.
inline Eigen::VectorXd project_balanced(const ElementPair& pair, const Eigen::VectorXd& eta,
                                        const ModelParams& params) {
    if (!(params.f > 0.0)) throw std::invalid_argument("project_balanced: system is singular for f = 0");
    const SparseOperator C = coriolis_op(pair);
    const SparseOperator G = gradient_op(pair);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(C.matrix());
    if (lu.info() != Eigen::Success) throw std::runtime_error("project_balanced: factorization failed");
    return lu.solve(Eigen::VectorXd((-params.g / params.f) * (G.matrix() * eta)));
}

/// Balanced initial state for any supported pair: pointwise construction when
/// the embedding conditions hold, weak projection otherwise.
inline State random_initial_state(const ElementPair& pair, const ModelParams& params, std::uint64_t seed) {
    if (pair.embeds_gradient && pair.closed_under_perp) return random_balanced_state(pair, params, seed);
    Eigen::VectorXd eta = random_surface(pair.H, seed);
    return State{project_balanced(pair, eta, params), std::move(eta), 0.0};
}

/// Implicit midpoint integrator for the semi-discrete system
///   M_u du/dt = -f C u - g G eta,   M_eta deta/dt = dbar G^T u.
/// The two step matrices are assembled and the left one factorized once;
/// every step is a single solve.
class MidpointStepper {
public:
    MidpointStepper(const ElementPair& pair, const ModelParams& params, SolverKind kind = SolverKind::direct,
                    double tol = 1e-12)
        : pair_(&pair),
          params_(params),
          kind_(kind),
          mu_(velocity_mass(pair)),
          meta_(pressure_mass(pair)),
          grad_(gradient_op(pair)),
          cor_(coriolis_op(pair)) {
        const int nv = pair.V.ndof();
        const int nh = pair.H.ndof();
        const int n = nv + nh;
        const double hdt = 0.5 * params.dt;

        std::vector<Eigen::Triplet<double>> left, right;
        left.reserve(static_cast<std::size_t>(mu_.nonzeros() + cor_.nonzeros() + 2 * grad_.nonzeros() +
                                              meta_.nonzeros()));
        right.reserve(left.capacity());
        auto emit = [&](const Eigen::SparseMatrix<double>& m, int roff, int coff, double cl, double cr) {
            for (int k = 0; k < m.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
                    left.emplace_back(roff + static_cast<int>(it.row()), coff + static_cast<int>(it.col()),
                                      cl * it.value());
                    right.emplace_back(roff + static_cast<int>(it.row()), coff + static_cast<int>(it.col()),
                                       cr * it.value());
                }
        };
        emit(mu_.matrix(), 0, 0, 1.0, 1.0);
        emit(cor_.matrix(), 0, 0, hdt * params.f, -hdt * params.f);
        emit(grad_.matrix(), 0, nv, hdt * params.g, -hdt * params.g);
        emit(Eigen::SparseMatrix<double>(grad_.matrix().transpose()), nv, 0, -hdt * params.dbar,
             hdt * params.dbar);
        emit(meta_.matrix(), nv, nv, 1.0, 1.0);

        left_.resize(n, n);
        left_.setFromTriplets(left.begin(), left.end());
        left_.makeCompressed();
        right_.resize(n, n);
        right_.setFromTriplets(right.begin(), right.end());
        right_.makeCompressed();

        if (kind_ == SolverKind::direct) {
            lu_.compute(left_);
            if (lu_.info() != Eigen::Success)
                throw std::runtime_error("MidpointStepper: sparse factorization failed");
        } else {
            krylov_.setTolerance(tol);
            krylov_.setMaxIterations(10 * n);
            krylov_.compute(left_);
        }
    }

    const ElementPair& pair() const { return *pair_; }
    const ModelParams& params() const { return params_; }
    const SparseOperator& velocity_mass_op() const { return mu_; }
    const SparseOperator& pressure_mass_op() const { return meta_; }
    const SparseOperator& gradient_operator() const { return grad_; }
    const SparseOperator& coriolis_operator() const { return cor_; }

    State step(const State& s) const {
        check_sizes(s);
        const int nv = pair_->V.ndof();
        const int nh = pair_->H.ndof();
        Eigen::VectorXd x(nv + nh);
        x.head(nv) = s.u;
        x.tail(nh) = s.eta;
        Eigen::VectorXd rhs = right_ * x;
        Eigen::VectorXd y;
        if (kind_ == SolverKind::direct) {
            y = lu_.solve(rhs);
        } else {
            y = krylov_.solveWithGuess(rhs, x);
            if (krylov_.info() != Eigen::Success)
                throw std::runtime_error("MidpointStepper: iterative solve did not converge, residual " +
                                         std::to_string(krylov_.error()));
        }
        return State{y.head(nv), y.tail(nh), s.time + params_.dt};
    }

    /// Discrete energy E = u' M_u u / 2 + (g / 2 dbar) eta' M_eta eta.
    double energy(const State& s) const {
        check_sizes(s);
        return 0.5 * s.u.dot(mu_.apply(s.u)) +
               0.5 * (params_.g / params_.dbar) * s.eta.dot(meta_.apply(s.eta));
    }

    /// Max norm of the discrete divergence integrals G^T u.
    double divergence_inf(const State& s) const { return grad_.apply_transpose(s.u).lpNorm<Eigen::Infinity>(); }

    /// Max norm of the discrete balance residual f C u + g G eta.
    double balance_residual_inf(const State& s) const {
        return (params_.f * cor_.apply(s.u) + params_.g * grad_.apply(s.eta)).lpNorm<Eigen::Infinity>();
    }

private:
    void check_sizes(const State& s) const {
        if (s.u.size() != pair_->V.ndof() || s.eta.size() != pair_->H.ndof())
            throw std::invalid_argument("State: coefficient lengths do not match the pair's spaces");
    }

    const ElementPair* pair_;
    ModelParams params_;
    SolverKind kind_;
    SparseOperator mu_, meta_, grad_, cor_;
    Eigen::SparseMatrix<double> left_, right_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> krylov_;
};

/// One implicit-midpoint step; assembles and factorizes for this step only.
/// Use MidpointStepper directly for multi-step runs.
inline State step_implicit_midpoint(const ElementPair& pair, const ModelParams& params, const State& s,
                                    SolverKind kind = SolverKind::direct) {
    return MidpointStepper(pair, params, kind).step(s);
}

struct DiagnosticsRow {
    int step = 0;
    double time = 0.0;
    double energy = 0.0;
    double div_inf = 0.0;
    double eta_drift = 0.0;  // max_i |eta_i(t)-eta_i(0)| / max_i |eta_i(0)|
    double u_drift = 0.0;
};

struct RunResult {
    std::vector<DiagnosticsRow> rows;  // rows 0..nsteps
    State final_state;
};

/// Advance nsteps and record per-step diagnostics. The snapshot sink, when
/// given, is called at step 0, every snapshot_interval steps, and at the end.
inline RunResult run(const MidpointStepper& stepper, State s, int nsteps, int snapshot_interval = 0,
                     const std::function<void(int, const State&)>& snapshot = {}) {
    if (nsteps < 1) throw std::invalid_argument("run: nsteps must be >= 1");
    const double eta0_max = s.eta.size() ? s.eta.lpNorm<Eigen::Infinity>() : 0.0;
    const double u0_max = s.u.size() ? s.u.lpNorm<Eigen::Infinity>() : 0.0;
    const Eigen::VectorXd eta0 = s.eta;
    const Eigen::VectorXd u0 = s.u;
    const double eta_den = eta0_max > 0.0 ? eta0_max : 1.0;
    const double u_den = u0_max > 0.0 ? u0_max : 1.0;

    RunResult out;
    out.rows.reserve(static_cast<std::size_t>(nsteps) + 1);
    auto record = [&](int step, const State& st) {
        out.rows.push_back({step, st.time, stepper.energy(st), stepper.divergence_inf(st),
                            (st.eta - eta0).lpNorm<Eigen::Infinity>() / eta_den,
                            (st.u - u0).lpNorm<Eigen::Infinity>() / u_den});
    };
    record(0, s);
    if (snapshot) snapshot(0, s);
    for (int step = 1; step <= nsteps; ++step) {
        s = stepper.step(s);
        record(step, s);
        if (snapshot && ((snapshot_interval > 0 && step % snapshot_interval == 0) || step == nsteps))
            snapshot(step, s);
    }
    out.final_state = std::move(s);
    return out;
}

}  // namespace swfe
