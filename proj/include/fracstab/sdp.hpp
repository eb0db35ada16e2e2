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
#ifndef FRACSTAB_SDP_HPP
#define FRACSTAB_SDP_HPP

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "fracstab/lmi.hpp"

namespace fracstab {

enum class FeasibilityStatus { feasible, infeasible, inconclusive };

inline const char* to_string(FeasibilityStatus s) {
    switch (s) {
    case FeasibilityStatus::feasible: return "feasible";
    case FeasibilityStatus::infeasible: return "infeasible";
    case FeasibilityStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

struct FeasibilityResult {
    FeasibilityStatus status = FeasibilityStatus::inconclusive;
    Vector assignment;              ///< flat parameter vector (meaningful when feasible)
    double certificate_margin = 0;  ///< smallest eigenvalue slack achieved (feasible) or dual upper bound (infeasible)
    double upper_bound = 0;         ///< best proven upper bound on the achievable margin
    int newton_steps = 0;
    std::string diagnostic;

    /// Value of a named problem variable at the assignment.
    [[nodiscard]] Matrix value(const MatrixVariable& v) const { return v.value(assignment); }
};

struct SolverOptions {
    double barrier_growth = 8.0;
    double initial_weight = 1.0;
    double max_weight = 1e14;
    int max_newton_per_stage = 80;
    double relative_gap = 1e-7;
    bool stop_when_feasible = false;
};

namespace detail {

/// Constraint block after elimination of equalities, in reduced variables
/// v = (y, t). The margin variable t enters every block with coefficient -I.
struct ReducedBlock {
    Matrix constant;
    std::vector<std::pair<int, Matrix>> terms;
};

struct ReducedProblem {
    std::vector<ReducedBlock> blocks;
    Vector x_particular;
    Matrix basis;   ///< x = x_particular + basis * y; orthonormal columns
    bool identity_basis = true;
    int reduced = 0; ///< dim(y)
};

inline ReducedProblem reduce(const LmiFeasibilityProblem& problem) {
    const int m = problem.parameter_count();
    ReducedProblem out;
    out.x_particular = Vector::Zero(m);
    out.basis = Matrix::Identity(m, m);

    if (!problem.equalities.empty()) {
        Eigen::Index rows = 0;
        for (const auto& e : problem.equalities) rows += e.rows() * e.cols();
        Matrix eq = Matrix::Zero(rows, m);
        Vector rhs = Vector::Zero(rows);
        Eigen::Index r0 = 0;
        for (const auto& e : problem.equalities) {
            const auto count = e.rows() * e.cols();
            rhs.segment(r0, count) = -e.constant().reshaped();
            for (const auto& [i, coeff] : e.terms()) eq.block(r0, i, count, 1) = coeff.reshaped();
            r0 += count;
        }
        Eigen::JacobiSVD<Matrix> svd(eq, Eigen::ComputeFullV | Eigen::ComputeThinU);
        const double tol = 1e-10 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
            if (svd.singularValues()(i) > tol) ++rank;
        }
        out.x_particular = svd.solve(rhs);
        if ((eq * out.x_particular - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
            throw Error("LMI equality constraints are inconsistent");
        }
        out.basis = svd.matrixV().rightCols(m - rank);
        out.identity_basis = false;
    }
    out.reduced = static_cast<int>(out.basis.cols());

    for (const auto& c : problem.constraints) {
        const double sign = c.sense == Sense::positive_definite ? 1.0 : -1.0;
        const auto n = c.expression.rows();
        ReducedBlock block;
        block.constant = sign * c.expression.constant();
        if (out.identity_basis) {
            for (const auto& [i, coeff] : c.expression.terms()) block.terms.emplace_back(i, sign * coeff);
        } else {
            std::vector<Matrix> dense(static_cast<std::size_t>(out.reduced), Matrix::Zero(n, n));
            for (const auto& [i, coeff] : c.expression.terms()) {
                block.constant += sign * out.x_particular(i) * coeff;
                for (int j = 0; j < out.reduced; ++j) {
                    const double z = out.basis(i, j);
                    if (z != 0.0) dense[static_cast<std::size_t>(j)] += (sign * z) * coeff;
                }
            }
            for (int j = 0; j < out.reduced; ++j) {
                auto& d = dense[static_cast<std::size_t>(j)];
                if (d.cwiseAbs().maxCoeff() > 1e-14) block.terms.emplace_back(j, std::move(d));
            }
        }
        block.terms.emplace_back(out.reduced, -Matrix::Identity(n, n));
        out.blocks.push_back(std::move(block));
    }
    return out;
}

struct BarrierState {
    Vector v;       ///< (y, t)
    Vector x;       ///< full parameters
    std::vector<Eigen::LLT<Matrix>> factors;
    bool inside = false;
};

} // namespace detail

/**
 * @brief Decides feasibility of an LMI problem.
 *
 * Solves  max t  s.t.  G_k(x) >= t I  (G_k = +expr for ">=" constraints and
 * -expr for "<=" ones), |x_i| <= variable_bound, equalities, with a log-det
 * barrier path-following method. The problem is reported
 *   - feasible   when an iterate reaches t >= margin and a direct eigenvalue
 *                check confirms every constraint at the returned assignment,
 *   - infeasible when the trace-normalized dual matrices S_k^{-1} of a
 *                central point prove that no bounded x reaches t = margin,
 *   - inconclusive otherwise.
 */
inline FeasibilityResult solve_feasibility(const LmiFeasibilityProblem& problem, const SolverOptions& options = {}) {
    FeasibilityResult result;
    const int m = problem.parameter_count();
    if (problem.constraints.empty()) {
        result.status = FeasibilityStatus::feasible;
        result.assignment = Vector::Zero(m);
        result.certificate_margin = std::numeric_limits<double>::infinity();
        return result;
    }
    const double bound = problem.variable_bound;
    if (!(bound > 0.0) || !(problem.margin > 0.0)) throw RangeError("margin and variable_bound must be positive");

    const detail::ReducedProblem red = detail::reduce(problem);
    if (red.x_particular.size() && red.x_particular.cwiseAbs().maxCoeff() >= bound) {
        result.diagnostic = "equality constraints force a parameter outside the variable bound";
        return result;
    }
    const int r = red.reduced;
    const int dim = r + 1; // plus the margin variable t

    auto to_full = [&](const Vector& v) -> Vector {
        if (red.identity_basis) return red.x_particular + v.head(r);
        return red.x_particular + red.basis * v.head(r);
    };
    auto block_value = [&](const detail::ReducedBlock& b, const Vector& v) {
        Matrix s = b.constant;
        for (const auto& [j, coeff] : b.terms) s += v(j) * coeff;
        return s;
    };

    // barrier value at weight tau; nullopt outside the domain
    auto evaluate = [&](const Vector& v, double tau, detail::BarrierState* state) -> std::optional<double> {
        const Vector x = to_full(v);
        double f = -tau * v(r);
        for (int i = 0; i < m; ++i) {
            const double lo = bound + x(i), hi = bound - x(i);
            if (!(lo > 0.0) || !(hi > 0.0)) return std::nullopt;
            f -= std::log(lo) + std::log(hi);
        }
        std::vector<Eigen::LLT<Matrix>> factors;
        factors.reserve(red.blocks.size());
        for (const auto& b : red.blocks) {
            Eigen::LLT<Matrix> llt(block_value(b, v));
            if (llt.info() != Eigen::Success) return std::nullopt;
            const auto& l = llt.matrixLLT();
            for (Eigen::Index i = 0; i < l.rows(); ++i) {
                if (!(l(i, i) > 0.0)) return std::nullopt;
                f -= 2.0 * std::log(l(i, i));
            }
            factors.push_back(std::move(llt));
        }
        if (!std::isfinite(f)) return std::nullopt;
        if (state != nullptr) {
            state->v = v;
            state->x = x;
            state->factors = std::move(factors);
            state->inside = true;
        }
        return f;
    };

    // starting point: x = particular solution, t below every eigenvalue
    Vector v = Vector::Zero(dim);
    {
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& b : red.blocks) {
            if (b.constant.rows() == 0) continue;
            Eigen::SelfAdjointEigenSolver<Matrix> es(b.constant, Eigen::EigenvaluesOnly);
            lowest = std::min(lowest, es.eigenvalues()(0));
        }
        if (!std::isfinite(lowest)) lowest = 0.0;
        v(r) = lowest - 1.0;
    }

    detail::BarrierState state;
    double tau = options.initial_weight;
    if (!evaluate(v, tau, &state)) {
        result.diagnostic = "could not construct a strictly feasible starting point";
        return result;
    }

    // For PSD Z_k with sum_k tr(Z_k) = 1 and every admissible x:
    //   t <= min_k lambda_min(G_k(x)) <= sum_k <Z_k, G_k(x)>,
    // which is bounded over the box using the adjoint G*(Z).
    auto dual_bound = [&](const std::vector<Matrix>& zs) {
        double total_trace = 0.0;
        for (const auto& z : zs) total_trace += z.trace();
        if (!(total_trace > 0.0)) return std::numeric_limits<double>::infinity();
        double constant = 0.0;
        Vector adjoint = Vector::Zero(r);
        for (std::size_t k = 0; k < red.blocks.size(); ++k) {
            const auto& b = red.blocks[k];
            if (b.constant.rows() == 0) continue;
            constant += zs[k].cwiseProduct(b.constant).sum();
            for (const auto& [j, coeff] : b.terms) {
                if (j < r) adjoint(j) += zs[k].cwiseProduct(coeff).sum();
            }
        }
        constant /= total_trace;
        adjoint /= total_trace;
        if (red.identity_basis) return constant + bound * adjoint.cwiseAbs().sum();
        // y = basis^T (x - x_p), so |y|_2 <= bound sqrt(m) + |x_p|_2
        const double radius = bound * std::sqrt(static_cast<double>(m)) + red.x_particular.norm();
        return constant + adjoint.norm() * radius;
    };

    auto central_duals = [&](const detail::BarrierState& s) {
        std::vector<Matrix> zs;
        for (const auto& f : s.factors) zs.push_back(f.solve(Matrix::Identity(f.rows(), f.rows())));
        return zs;
    };

    // Restricts the dual estimate to its dominant eigenspace and solves the
    // (small) linear system G*(Z) = 0, sum tr Z = 1 there with a minimum-norm
    // correction. Any PSD outcome is an exact certificate candidate.
    auto purified_bound = [&](const std::vector<Matrix>& zs) {
        std::vector<Eigen::SelfAdjointEigenSolver<Matrix>> eig;
        double top = 0.0, total = 0.0;
        for (const auto& z : zs) {
            total += z.trace();
            eig.emplace_back(z.rows() ? Matrix(0.5 * (z + z.transpose())) : z);
            if (z.rows()) top = std::max(top, eig.back().eigenvalues().maxCoeff());
        }
        double best = std::numeric_limits<double>::infinity();
        if (!(top > 0.0)) return best;
        for (double ratio = 1e-1; ratio >= 1e-12; ratio *= 0.1) {
            std::vector<Matrix> bases;
            std::vector<int> offsets{0};
            for (std::size_t k = 0; k < zs.size(); ++k) {
                const auto n = zs[k].rows();
                Eigen::Index keep = 0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    if (eig[k].eigenvalues()(i) >= ratio * top) ++keep;
                }
                bases.push_back(n ? Matrix(eig[k].eigenvectors().rightCols(keep)) : Matrix(0, 0));
                offsets.push_back(offsets.back() + static_cast<int>(keep * (keep + 1) / 2));
            }
            const int unknowns = offsets.back();
            if (unknowns == 0 || unknowns > 4000) continue;
            Matrix system = Matrix::Zero(r + 1, unknowns);
            Vector rhs = Vector::Zero(r + 1);
            rhs(r) = 1.0;
            Vector start = Vector::Zero(unknowns);
            for (std::size_t k = 0; k < zs.size(); ++k) {
                const Matrix& u = bases[k];
                const auto q = u.cols();
                if (q == 0) continue;
                auto pack = [&](Eigen::Index a, Eigen::Index c) {
                    return offsets[k] + static_cast<int>(c * (c + 1) / 2 + a);
                };
                const Vector lam = eig[k].eigenvalues().tail(q);
                for (Eigen::Index c = 0; c < q; ++c) start(pack(c, c)) = lam(c) / total;
                for (const auto& [j, coeff] : red.blocks[k].terms) {
                    const Matrix h = u.transpose() * coeff * u;
                    const Eigen::Index row = j < r ? j : r;
                    const double sign = j < r ? 1.0 : -1.0; // t enters with -I
                    for (Eigen::Index c = 0; c < q; ++c) {
                        for (Eigen::Index a = 0; a <= c; ++a) {
                            system(row, pack(a, c)) += sign * (a == c ? h(a, a) : h(a, c) + h(c, a));
                        }
                    }
                }
            }
            const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(system);
            const Vector packed = start - cod.solve(system * start - rhs);
            // clip onto the PSD cone; dual_bound stays rigorous for any PSD
            // candidate and rounding leaves rank-deficient certificates with
            // slightly negative eigenvalues
            std::vector<Matrix> candidate;
            for (std::size_t k = 0; k < zs.size(); ++k) {
                const Matrix& u = bases[k];
                const auto q = u.cols();
                Matrix mk = Matrix::Zero(q, q);
                for (Eigen::Index c = 0; c < q; ++c) {
                    for (Eigen::Index a = 0; a <= c; ++a) {
                        mk(a, c) = mk(c, a) = packed(offsets[k] + static_cast<int>(c * (c + 1) / 2 + a));
                    }
                }
                if (q > 0) {
                    Eigen::SelfAdjointEigenSolver<Matrix> split(mk);
                    mk = split.eigenvectors() * split.eigenvalues().cwiseMax(0.0).asDiagonal() *
                         split.eigenvectors().transpose();
                }
                candidate.push_back(u * mk * u.transpose());
            }
            best = std::min(best, dual_bound(candidate));
        }
        return best;
    };

    double best_upper = std::numeric_limits<double>::infinity();
    bool numerical_trouble = false;
    std::string trouble;

    while (tau <= options.max_weight) {
        // centering by damped Newton
        for (int iter = 0; iter < options.max_newton_per_stage; ++iter) {
            Vector grad = Vector::Zero(dim);
            Matrix hess = Matrix::Zero(dim, dim);
            grad(r) = -tau;
            for (int i = 0; i < m; ++i) {
                const double lo = bound + state.x(i), hi = bound - state.x(i);
                const double g = 1.0 / hi - 1.0 / lo;
                const double h = 1.0 / (hi * hi) + 1.0 / (lo * lo);
                if (red.identity_basis) {
                    grad(i) += g;
                    hess(i, i) += h;
                } else {
                    const auto row = red.basis.row(i);
                    grad.head(r) += g * row.transpose();
                    hess.topLeftCorner(r, r).noalias() += h * row.transpose() * row;
                }
            }
            for (std::size_t k = 0; k < red.blocks.size(); ++k) {
                const auto& b = red.blocks[k];
                const auto n = b.constant.rows();
                if (n == 0) continue;
                const Matrix l_inv = state.factors[k].matrixL().solve(Matrix::Identity(n, n));
                Matrix scaled(n * n, static_cast<Eigen::Index>(b.terms.size()));
                for (std::size_t q = 0; q < b.terms.size(); ++q) {
                    const Matrix rq = l_inv * b.terms[q].second * l_inv.transpose();
                    scaled.col(static_cast<Eigen::Index>(q)) = rq.reshaped();
                    grad(b.terms[q].first) -= rq.trace();
                }
                const Matrix local = scaled.transpose() * scaled;
                for (std::size_t p = 0; p < b.terms.size(); ++p) {
                    for (std::size_t q = 0; q < b.terms.size(); ++q) {
                        hess(b.terms[p].first, b.terms[q].first) +=
                            local(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
                    }
                }
            }
            // symmetric diagonal equilibration before factoring
            Vector d = hess.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
            const Matrix hs = d.asDiagonal() * hess * d.asDiagonal();
            Eigen::LDLT<Matrix> ldlt(hs);
            if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14) {
                // tiny ridge for numerically semidefinite Newton systems
                ldlt.compute(hs + 1e-12 * Matrix::Identity(dim, dim));
            }
            if (ldlt.info() != Eigen::Success) {
                numerical_trouble = true;
                trouble = "Newton system factorization failed";
                break;
            }
            const Vector step = d.asDiagonal() * ldlt.solve(-(d.asDiagonal() * grad));
            if (!step.allFinite()) {
                numerical_trouble = true;
                trouble = "Newton step is not finite";
                break;
            }
            ++result.newton_steps;
            const double decrement = -grad.dot(step);
            if (decrement < 0.0) {
                // Hessian lost definiteness numerically
                numerical_trouble = true;
                trouble = "Newton direction is not a descent direction";
                break;
            }
            if (decrement / 2.0 < 1e-9) break;

            // damped Newton for a self-concordant barrier: the step 1/(1 + lambda)
            // decreases f without a function-value comparison, which stalls
            // on rounding once tau is large
            const double lambda = std::sqrt(decrement);
            double alpha = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
                detail::BarrierState trial;
                if (evaluate(state.v + alpha * step, tau, &trial)) {
                    state = std::move(trial);
                    moved = true;
                    break;
                }
            }
            if (!moved) break; // stalled: treat as centered
        }
        if (numerical_trouble) break;

        const double t = state.v(r);
        const auto duals = central_duals(state);
        double upper = dual_bound(duals);
        if (t < problem.margin && upper >= problem.margin) upper = std::min(upper, purified_bound(duals));
        best_upper = std::min(best_upper, upper);
        if (best_upper < problem.margin) break;
        if (t >= problem.margin) {
            if (options.stop_when_feasible) break;
            if (best_upper - t <= options.relative_gap * std::max(std::abs(t), problem.margin)) break;
        }
        tau *= options.barrier_growth;
    }

    result.upper_bound = best_upper;
    const double t = state.v(r);
    if (t >= problem.margin) {
        // re-verify directly on the original constraints
        double slack = std::numeric_limits<double>::infinity();
        for (const auto& c : problem.constraints) {
            const Matrix value = c.expression.evaluate(state.x);
            const Matrix g = c.sense == Sense::positive_definite ? value : Matrix(-value);
            if (g.rows() == 0) continue;
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
            slack = std::min(slack, es.eigenvalues()(0));
        }
        double eq_residual = 0.0;
        for (const auto& e : problem.equalities) {
            if (e.rows() * e.cols() > 0) eq_residual = std::max(eq_residual, e.evaluate(state.x).cwiseAbs().maxCoeff());
        }
        result.assignment = state.x;
        result.certificate_margin = slack;
        if (slack >= problem.margin && eq_residual <= 1e-8 * std::max(1.0, state.x.cwiseAbs().maxCoeff())) {
            result.status = FeasibilityStatus::feasible;
        } else {
            result.diagnostic = "candidate failed direct re-verification (slack " + std::to_string(slack) + ")";
        }
        return result;
    }
    result.assignment = state.x;
    if (best_upper < problem.margin) {
        result.status = FeasibilityStatus::infeasible;
        result.certificate_margin = best_upper;
        return result;
    }
    result.certificate_margin = t;
    result.diagnostic = numerical_trouble ? trouble
                                          : "barrier weight limit reached without a certificate (best margin " +
                                                std::to_string(t) + ", upper bound " + std::to_string(best_upper) + ")";
    return result;
}

/**
 * @brief Upper bound on the best margin t of a problem implied by a dual
 * candidate.
 *
 * For PSD Z_k, every admissible x satisfies
 *   t sum_k tr Z_k <= sum_k <Z_k, G_k(x)> <= c + variable_bound |G*(Z)|_1,
 * so a result below problem.margin proves infeasibility. Candidates are
 * listed per constraint; a block with negative eigenvalues is shifted by
 * |lambda_min| I first, which keeps the bound valid.
 */
inline double certificate_bound(const LmiFeasibilityProblem& problem, const std::vector<Matrix>& z) {
    const double inf = std::numeric_limits<double>::infinity();
    if (z.size() != problem.constraints.size()) return inf;
    double trace = 0.0, constant = 0.0;
    Vector adjoint = Vector::Zero(problem.parameter_count());
    for (std::size_t k = 0; k < z.size(); ++k) {
        const auto& c = problem.constraints[k];
        if (z[k].rows() != c.expression.rows() || z[k].cols() != c.expression.cols()) return inf;
        if (z[k].rows() == 0) continue;
        Matrix zk = 0.5 * (z[k] + z[k].transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(zk, Eigen::EigenvaluesOnly);
        if (!zk.allFinite()) return inf;
        zk.diagonal().array() += std::max(0.0, -es.eigenvalues()(0));
        const double sign = c.sense == Sense::positive_definite ? 1.0 : -1.0;
        trace += zk.trace();
        constant += sign * zk.cwiseProduct(c.expression.constant()).sum();
        for (const auto& [i, coeff] : c.expression.terms()) adjoint(i) += sign * zk.cwiseProduct(coeff).sum();
    }
    if (!(trace > 0.0)) return inf;
    return (constant + problem.variable_bound * adjoint.cwiseAbs().sum()) / trace;
}

} // namespace fracstab

#endif // FRACSTAB_SDP_HPP
