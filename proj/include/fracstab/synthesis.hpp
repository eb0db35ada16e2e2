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
#ifndef FRACSTAB_SYNTHESIS_HPP
#define FRACSTAB_SYNTHESIS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "fracstab/lmi.hpp"
#include "fracstab/model.hpp"
#include "fracstab/sdp.hpp"
#include "fracstab/spectral.hpp"

namespace fracstab {

/**
 * @brief Dynamic output-feedback controller of order n_c
 *
 *   D^{alpha_c} x_c = Ac x_c + Bc y,   u = Cc x_c + Dc y.
 *
 * n_c = 0 is a static gain u = Dc y.
 */
struct ControllerRealization {
    Matrix ac;
    Matrix bc;
    Matrix cc;
    Matrix dc;
    RationalOrder alpha_c{1, 2};

    [[nodiscard]] Eigen::Index order() const noexcept { return ac.rows(); }

    /// Static gain controller.
    static ControllerRealization static_gain(Matrix dc, RationalOrder alpha_c) {
        ControllerRealization c;
        c.ac = Matrix(0, 0);
        c.bc = Matrix(0, dc.cols());
        c.cc = Matrix(dc.rows(), 0);
        c.dc = std::move(dc);
        c.alpha_c = alpha_c;
        return c;
    }
};

/// Closed loop of plant and controller as a multi-order system; controller
/// states are appended with order alpha_c. The result has no inputs and
/// keeps the plant outputs.
inline MultiOrderSystem assemble_closed_loop(const MultiOrderSystem& system, const ControllerRealization& controller) {
    const auto n = system.states();
    const auto nc = controller.order();
    const auto l = system.inputs();
    const auto m = system.outputs();
    if (controller.dc.rows() != l || controller.dc.cols() != m || controller.ac.cols() != nc ||
        controller.bc.rows() != nc || controller.bc.cols() != m || controller.cc.rows() != l ||
        controller.cc.cols() != nc) {
        throw DimensionError("controller dimensions do not match the plant (inputs " + std::to_string(l) +
                             ", outputs " + std::to_string(m) + ")");
    }
    const auto base = commensurate_base(system.orders());
    if (!(controller.alpha_c == base.alpha_c)) {
        throw RangeError("controller order " + controller.alpha_c.to_string() + " differs from the plant base order " +
                         base.alpha_c.to_string());
    }

    Matrix a_cl(n + nc, n + nc);
    a_cl.topLeftCorner(n, n) = system.a() + system.b() * controller.dc * system.c();
    a_cl.topRightCorner(n, nc) = system.b() * controller.cc;
    a_cl.bottomLeftCorner(nc, n) = controller.bc * system.c();
    a_cl.bottomRightCorner(nc, nc) = controller.ac;

    std::vector<RationalOrder> orders = system.orders();
    orders.insert(orders.end(), static_cast<std::size_t>(nc), controller.alpha_c);

    Matrix c_cl = Matrix::Zero(m, n + nc);
    c_cl.leftCols(n) = system.c();
    Vector x0 = Vector::Zero(n + nc);
    x0.head(n) = system.x0();
    Vector x0_deriv = Vector::Zero(n + nc);
    x0_deriv.head(n) = system.x0_deriv();
    return {std::move(a_cl), Matrix(n + nc, 0), std::move(c_cl), std::move(orders), std::move(x0), std::move(x0_deriv)};
}

/// Lifted state matrix of an assembled closed loop.
inline Matrix expand_closed_loop(const MultiOrderSystem& closed, const LiftOptions& options = {}) {
    return expand_state_matrix(closed.a(), std::span<const RationalOrder>(closed.orders()), options);
}

/// Same matrix built from the plant's lifted blocks:
///   ((Abig + Bbig Dc Cbig, Bbig Cc), (Bc Cbig, Ac)).
inline Matrix closed_loop_block_formula(const CommensurateRealization& plant, const ControllerRealization& controller) {
    const auto big = plant.a_big.rows();
    const auto nc = controller.order();
    Matrix out(big + nc, big + nc);
    out.topLeftCorner(big, big) = plant.a_big + plant.b_big * controller.dc * plant.c_big;
    out.topRightCorner(big, nc) = plant.b_big * controller.cc;
    out.bottomLeftCorner(nc, big) = controller.bc * plant.c_big;
    out.bottomRightCorner(nc, nc) = controller.ac;
    return out;
}

struct SynthesisLmiOptions {
    double margin = 1e-6;
    double variable_bound = 1e4;
    /// Adds linear equalities that confine W2, W4 and Cbig*Q_S to the row
    /// space of Cbig so that the pseudo-inverse recovery is exact. More
    /// conservative than the plain inequality.
    bool exact_recovery = false;
};

/// Synthesis LMI together with handles to its variables.
struct SynthesisLmi {
    LmiFeasibilityProblem problem;
    HermitianVariable p_s;
    std::optional<HermitianVariable> p_c;
    std::optional<MatrixVariable> w1, w2, w3;
    MatrixVariable w4;
    double theta = 0.0;
    Eigen::Index controller_order = 0;
};

/**
 * Variables: Hermitian P_S (N), Hermitian P_C (n_c), W1 (n_c x n_c),
 * W2 (n_c x N), W3 (l x n_c), W4 (l x N). With Q_S = r P_S + conj(r P_S):
 *
 *   [ Abig Q_S + Q_S^T Abig^T + Bbig W4 + W4^T Bbig^T   Bbig W3 + W2^T ]
 *   [ W2 + W3^T Bbig^T                                  W1 + W1^T      ]  <= -margin I
 *
 * plus P_S > 0 and P_C > 0. For n_c = 0 only the upper-left block remains.
 */
inline SynthesisLmi build_synthesis_lmi(const Matrix& a_big, const Matrix& b_big, const Matrix& c_big,
                                        Eigen::Index nc, const RationalOrder& alpha_c,
                                        const SynthesisLmiOptions& options = {}) {
    const auto big = a_big.rows();
    if (a_big.cols() != big || b_big.rows() != big || c_big.cols() != big) {
        throw DimensionError("build_synthesis_lmi: lifted matrices are inconsistent");
    }
    if (nc < 0) throw RangeError("controller order must be nonnegative");
    const auto l = b_big.cols();

    SynthesisLmi out;
    out.theta = sector_angle(alpha_c);
    out.controller_order = nc;
    auto& problem = out.problem;
    problem.margin = options.margin;
    problem.variable_bound = options.variable_bound;

    out.p_s = HermitianVariable::add_to(problem, "P_S", big);
    if (nc > 0) {
        out.p_c = HermitianVariable::add_to(problem, "P_C", nc);
        out.w1 = problem.add_variable("W1", Structure::full, nc, nc);
        out.w2 = problem.add_variable("W2", Structure::full, nc, big);
        out.w3 = problem.add_variable("W3", Structure::full, l, nc);
    }
    out.w4 = problem.add_variable("W4", Structure::full, l, big);

    const AffineMatrix q_s = out.p_s.rotated_real_part(out.theta);
    const AffineMatrix aq = a_big * q_s;
    const AffineMatrix bw4 = b_big * out.w4.expression();
    const AffineMatrix e11 = aq + aq.transpose() + bw4 + bw4.transpose();

    problem.add_constraint("P_S > 0", realify_hermitian_pd(out.p_s), Sense::positive_definite);
    if (nc > 0) {
        problem.add_constraint("P_C > 0", realify_hermitian_pd(*out.p_c), Sense::positive_definite);
        const AffineMatrix w1 = out.w1->expression();
        const AffineMatrix w2 = out.w2->expression();
        const AffineMatrix w3 = out.w3->expression();
        const AffineMatrix e12 = b_big * w3 + w2.transpose();
        problem.add_constraint("closed-loop sector", AffineMatrix::blocks(e11, e12, e12.transpose(), w1 + w1.transpose()),
                               Sense::negative_definite);
    } else {
        problem.add_constraint("closed-loop sector", e11, Sense::negative_definite);
    }

    if (options.exact_recovery) {
        const Matrix pinv = c_big.completeOrthogonalDecomposition().pseudoInverse();
        const Matrix null_projector = Matrix::Identity(big, big) - pinv * c_big;
        problem.equalities.push_back(c_big * q_s * null_projector);
        problem.equalities.push_back(out.w4.expression() * null_projector);
        if (nc > 0) problem.equalities.push_back(out.w2->expression() * null_projector);
    }
    return out;
}

/// Numeric values of the synthesis variables.
struct SynthesisAssignment {
    Eigen::MatrixXcd p_s;
    Eigen::MatrixXcd p_c;
    Matrix w1, w2, w3, w4;
};

inline SynthesisAssignment extract_assignment(const SynthesisLmi& lmi, const FeasibilityResult& result) {
    SynthesisAssignment a;
    const Vector& x = result.assignment;
    const auto nc = lmi.controller_order;
    const auto big = lmi.p_s.dim;
    const auto l = lmi.w4.rows;
    a.p_s = lmi.p_s.value(x);
    a.w4 = lmi.w4.value(x);
    if (nc > 0) {
        a.p_c = lmi.p_c->value(x);
        a.w1 = lmi.w1->value(x);
        a.w2 = lmi.w2->value(x);
        a.w3 = lmi.w3->value(x);
    } else {
        a.p_c = Eigen::MatrixXcd(0, 0);
        a.w1 = Matrix(0, 0);
        a.w2 = Matrix(0, big);
        a.w3 = Matrix(l, 0);
    }
    return a;
}

/// r P + conj(r P) for r = exp(i theta).
inline Matrix rotated_real_part(const Eigen::MatrixXcd& p, double theta) {
    return 2.0 * (std::cos(theta) * p.real() - std::sin(theta) * p.imag());
}

struct RecoveredController {
    ControllerRealization controller;
    double residual = 0.0;          ///< max(|Bc Cbig Q_S - W2|_F, |Dc Cbig Q_S - W4|_F)
    double relative_residual = 0.0; ///< residual / max(|W2|_F, |W4|_F)
};

namespace detail {

inline double condition_number(const Matrix& m) {
    if (m.rows() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
}

} // namespace detail

/**
 * Undoes the linearizing change of variables:
 *   Ac = W1 Q_C^-1, Cc = W3 Q_C^-1, Bc = W2 Q_S^-1 Cbig^+, Dc = W4 Q_S^-1 Cbig^+.
 * Throws RecoveryError when Q_S or Q_C has condition number above
 * `max_condition`.
 */
inline RecoveredController recover_controller(const SynthesisAssignment& assignment, const Matrix& c_big,
                                              const RationalOrder& alpha_c, double max_condition = 1e12) {
    const double theta = sector_angle(alpha_c);
    const Matrix q_s = rotated_real_part(assignment.p_s, theta);
    const Matrix q_c = rotated_real_part(assignment.p_c, theta);
    if (q_s.rows() != c_big.cols()) throw DimensionError("recover_controller: Q_S and Cbig disagree");
    const double cond_s = detail::condition_number(q_s);
    const double cond_c = detail::condition_number(q_c);
    if (!(cond_s <= max_condition)) {
        throw RecoveryError("Q_S is numerically singular (condition number " + std::to_string(cond_s) + ")");
    }
    if (!(cond_c <= max_condition)) {
        throw RecoveryError("Q_C is numerically singular (condition number " + std::to_string(cond_c) + ")");
    }

    const Matrix pinv = c_big.completeOrthogonalDecomposition().pseudoInverse();
    const Matrix q_s_inv = q_s.partialPivLu().inverse();

    RecoveredController out;
    auto& k = out.controller;
    k.alpha_c = alpha_c;
    k.dc = assignment.w4 * q_s_inv * pinv;
    if (q_c.rows() > 0) {
        const Matrix q_c_inv = q_c.partialPivLu().inverse();
        k.ac = assignment.w1 * q_c_inv;
        k.cc = assignment.w3 * q_c_inv;
        k.bc = assignment.w2 * q_s_inv * pinv;
    } else {
        k.ac = Matrix(0, 0);
        k.bc = Matrix(0, c_big.rows());
        k.cc = Matrix(assignment.w4.rows(), 0);
    }

    const double r4 = (k.dc * c_big * q_s - assignment.w4).norm();
    const double r2 = q_c.rows() > 0 ? (k.bc * c_big * q_s - assignment.w2).norm() : 0.0;
    out.residual = std::max(r2, r4);
    const double scale = std::max({assignment.w2.size() ? assignment.w2.norm() : 0.0, assignment.w4.norm(), 1e-300});
    out.relative_residual = out.residual / scale;
    return out;
}

enum class SynthesisStatus { success, infeasible, inconclusive, recovery_failed, verification_failed };

inline const char* to_string(SynthesisStatus s) {
    switch (s) {
    case SynthesisStatus::success: return "success";
    case SynthesisStatus::infeasible: return "infeasible";
    case SynthesisStatus::inconclusive: return "inconclusive";
    case SynthesisStatus::recovery_failed: return "recovery_failed";
    case SynthesisStatus::verification_failed: return "verification_failed";
    }
    return "?";
}

struct SynthesisOptions {
    SynthesisLmiOptions lmi;
    SolverOptions solver;
    LiftOptions lift;
    double residual_tolerance = 1e-6; ///< relative; enforced only with exact_recovery
    double max_condition = 1e12;
};

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::inconclusive;
    std::string message;
    std::optional<ControllerRealization> controller;
    std::optional<SynthesisAssignment> assignment;
    double recovery_residual = 0.0;
    double relative_residual = 0.0;
    double lmi_margin = 0.0;
    std::optional<StabilityVerdict> closed_loop_verdict;

    [[nodiscard]] bool success() const noexcept { return status == SynthesisStatus::success; }
};

/**
 * End-to-end synthesis: lift, build and solve the LMI, recover the
 * controller, assemble the closed loop and verify it with the independent
 * sector test. Success is never inferred from LMI feasibility alone.
 */
inline SynthesisResult synthesize(const MultiOrderSystem& system, Eigen::Index nc, const SynthesisOptions& options = {}) {
    SynthesisResult out;
    const auto plant = lift(system, options.lift);
    if (system.inputs() == 0 || system.outputs() == 0) {
        throw DimensionError("synthesis needs at least one input and one output");
    }
    const auto lmi = build_synthesis_lmi(plant.a_big, plant.b_big, plant.c_big, nc, plant.alpha_c, options.lmi);
    const auto solved = solve_feasibility(lmi.problem, options.solver);
    out.lmi_margin = solved.certificate_margin;

    if (solved.status == FeasibilityStatus::infeasible) {
        out.status = SynthesisStatus::infeasible;
        out.message = "no controller of order " + std::to_string(nc) +
                      " found: the synthesis LMI is infeasible; the condition is only sufficient, so a "
                      "stabilizer may still exist";
        return out;
    }
    if (solved.status == FeasibilityStatus::inconclusive) {
        out.status = SynthesisStatus::inconclusive;
        out.message = "synthesis LMI solve was inconclusive: " + solved.diagnostic;
        return out;
    }

    out.assignment = extract_assignment(lmi, solved);
    RecoveredController recovered;
    try {
        recovered = recover_controller(*out.assignment, plant.c_big, plant.alpha_c, options.max_condition);
    } catch (const RecoveryError& e) {
        out.status = SynthesisStatus::recovery_failed;
        out.message = e.what();
        return out;
    }
    out.controller = recovered.controller;
    out.recovery_residual = recovered.residual;
    out.relative_residual = recovered.relative_residual;
    if (options.lmi.exact_recovery && recovered.relative_residual > options.residual_tolerance) {
        out.status = SynthesisStatus::recovery_failed;
        out.message = "pseudo-inverse recovery residual " + std::to_string(recovered.relative_residual) +
                      " exceeds tolerance";
        return out;
    }

    const auto closed = assemble_closed_loop(system, recovered.controller);
    out.closed_loop_verdict = argument_stability_test(expand_closed_loop(closed, options.lift), plant.alpha_c);
    if (!out.closed_loop_verdict->stable()) {
        out.status = SynthesisStatus::verification_failed;
        out.message = "LMI was feasible but the recovered closed loop fails the sector test (margin " +
                      std::to_string(out.closed_loop_verdict->margin) + ")";
        return out;
    }
    out.status = SynthesisStatus::success;
    return out;
}

} // namespace fracstab

#endif // FRACSTAB_SYNTHESIS_HPP
