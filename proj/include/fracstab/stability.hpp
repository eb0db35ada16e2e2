/*
 Copyright 2026 The fracstab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef FRACSTAB_STABILITY_HPP
#define FRACSTAB_STABILITY_HPP

#include <algorithm>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fracstab/lmi.hpp"
#include "fracstab/model.hpp"
#include "fracstab/sdp.hpp"
#include "fracstab/spectral.hpp"

namespace fracstab {

struct LmiCheckOptions {
    double margin = 1e-6;
    double variable_bound = 1e4;
    LiftOptions lift;
    SolverOptions solver;
};

/// Sector test applied to the lifted state matrix of a multi-order plant.
inline StabilityVerdict spectral_stability_check(const MultiOrderSystem& system, const LiftOptions& lift_options = {},
                                                 const EigenOptions& eigen_options = {}) {
    const auto realization = lift(system, lift_options);
    return argument_stability_test(realization.a_big, realization.alpha_c, eigen_options);
}

namespace detail {

/// Adjoint of the problem's constraints applied to per-constraint candidates.
inline Vector candidate_adjoint(const LmiFeasibilityProblem& problem, const std::vector<Matrix>& z) {
    Vector adjoint = Vector::Zero(problem.parameter_count());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto& c = problem.constraints[k];
        const double sign = c.sense == Sense::positive_definite ? 1.0 : -1.0;
        for (const auto& [i, coeff] : c.expression.terms()) adjoint(i) += sign * z[k].cwiseProduct(coeff).sum();
    }
    return adjoint;
}

/// realify(u u^*) written as a sum of two real outer products.
inline Matrix realified_outer(const Eigen::VectorXcd& u) {
    const auto n = u.size();
    Vector p(2 * n), q(2 * n);
    p << u.real(), u.imag();
    q << -u.imag(), u.real();
    return p * p.transpose() + q * q.transpose();
}

/**
 * Dual candidates of the sector LMI built from left eigenvectors w of Abig:
 * Z_sector = 2 Re(w w^*) and Z_X a nonnegative mix of realify(w w^*) and
 * realify(conj(w) w^T) fitted to cancel the adjoint. A nonnegative fit
 * exists when the eigenvalue lies in the unstable sector; the candidate is
 * then checked by certificate_bound like any other dual.
 */
inline double eigenvector_certificate(const LmiFeasibilityProblem& problem, const Matrix& a_big) {
    double best = std::numeric_limits<double>::infinity();
    if (problem.constraints.size() != 2 || a_big.rows() == 0) return best;
    const auto n = a_big.rows();
    Eigen::ComplexEigenSolver<Matrix> es(a_big.transpose());
    if (es.info() != Eigen::Success) return best;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXcd w = es.eigenvectors().col(j).normalized();
        const Matrix z_sector = 2.0 * (w.real() * w.real().transpose() + w.imag() * w.imag().transpose());
        const Matrix g1 = realified_outer(w), g2 = realified_outer(w.conjugate());
        const Matrix zero_x = Matrix::Zero(2 * n, 2 * n), zero_s = Matrix::Zero(n, n);
        const Vector base = candidate_adjoint(problem, {z_sector, zero_x});
        Matrix basis(base.size(), 2);
        basis.col(0) = candidate_adjoint(problem, {zero_s, g1});
        basis.col(1) = candidate_adjoint(problem, {zero_s, g2});
        // nonnegative least squares over two weights
        Eigen::Vector2d s = basis.colPivHouseholderQr().solve(-base);
        if (s(0) < 0.0 || s(1) < 0.0 || !s.allFinite()) {
            s.setZero();
            double residual = base.squaredNorm();
            for (int c = 0; c < 2; ++c) {
                const double norm2 = basis.col(c).squaredNorm();
                if (!(norm2 > 0.0)) continue;
                const double v = std::max(0.0, -basis.col(c).dot(base) / norm2);
                const double r = (base + v * basis.col(c)).squaredNorm();
                if (r < residual) {
                    residual = r;
                    s.setZero();
                    s(c) = v;
                }
            }
        }
        best = std::min(best, certificate_bound(problem, {z_sector, s(0) * g1 + s(1) * g2}));
    }
    return best;
}

} // namespace detail

/// Stability of the unforced plant via feasibility of the sector LMI on its
/// lifted realization. Feasible => stable, certified infeasible => unstable,
/// anything else is inconclusive.
inline StabilityVerdict lmi_stability_check(const MultiOrderSystem& system, const LmiCheckOptions& options = {}) {
    const auto realization = lift(system, options.lift);
    const auto problem =
        build_stability_lmi(realization.a_big, realization.alpha_c, options.margin, options.variable_bound);
    auto result = solve_feasibility(problem, options.solver);
    if (result.status == FeasibilityStatus::inconclusive) {
        // the barrier path cannot resolve margin / variable_bound near the
        // sector boundary; eigenvector duals often can, and are checked the
        // same way
        const double bound = detail::eigenvector_certificate(problem, realization.a_big);
        if (bound < problem.margin) {
            result.status = FeasibilityStatus::infeasible;
            result.certificate_margin = bound;
            result.diagnostic = "infeasible by an eigenvector-derived dual certificate";
        }
    }

    StabilityVerdict verdict;
    verdict.method = StabilityMethod::lmi;
    verdict.boundary = realization.alpha_c.value() * std::numbers::pi / 2.0;
    verdict.margin = result.certificate_margin;
    verdict.diagnostic = result.diagnostic;
    switch (result.status) {
    case FeasibilityStatus::feasible: verdict.decision = Decision::stable; break;
    case FeasibilityStatus::infeasible: verdict.decision = Decision::unstable; break;
    case FeasibilityStatus::inconclusive: verdict.decision = Decision::inconclusive; break;
    }
    return verdict;
}

} // namespace fracstab

#endif // FRACSTAB_STABILITY_HPP
