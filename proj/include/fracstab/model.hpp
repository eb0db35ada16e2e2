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
#ifndef FRACSTAB_MODEL_HPP
#define FRACSTAB_MODEL_HPP

#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracstab/error.hpp"
#include "fracstab/rational_order.hpp"

namespace fracstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * @brief Multi-order fractional LTI plant
 *
 *   D^{alpha_i} x_i = (A x + B u)_i,   y = C x
 *
 * with Caputo initial values x(0) = x0 and, for states with alpha_i >= 1,
 * x'(0) = x0_deriv. B may have zero columns and C zero rows.
 */
class MultiOrderSystem {
public:
    MultiOrderSystem(Matrix a, Matrix b, Matrix c, std::vector<RationalOrder> orders,
                     Vector x0 = {}, Vector x0_deriv = {})
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), orders_(std::move(orders)),
          x0_(std::move(x0)), x0_deriv_(std::move(x0_deriv)) {
        const auto n = a_.rows();
        if (n == 0 || a_.cols() != n) throw DimensionError("A must be a nonempty square matrix");
        if (static_cast<Eigen::Index>(orders_.size()) != n) {
            throw DimensionError("expected " + std::to_string(n) + " orders, got " +
                                 std::to_string(orders_.size()));
        }
        if (b_.size() == 0) b_.resize(n, b_.cols());
        if (c_.size() == 0) c_.resize(c_.rows(), n);
        if (b_.rows() != n) throw DimensionError("B must have as many rows as A");
        if (c_.cols() != n) throw DimensionError("C must have as many columns as A");
        if (x0_.size() == 0) x0_ = Vector::Zero(n);
        if (x0_deriv_.size() == 0) x0_deriv_ = Vector::Zero(n);
        if (x0_.size() != n || x0_deriv_.size() != n) {
            throw DimensionError("initial condition vectors must have length n");
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (orders_[static_cast<std::size_t>(i)].value() < 1.0 && x0_deriv_(i) != 0.0) {
                throw RangeError("x0_deriv[" + std::to_string(i) +
                                 "] must be zero for a state with order below 1");
            }
        }
    }

    [[nodiscard]] const Matrix& a() const noexcept { return a_; }
    [[nodiscard]] const Matrix& b() const noexcept { return b_; }
    [[nodiscard]] const Matrix& c() const noexcept { return c_; }
    [[nodiscard]] const std::vector<RationalOrder>& orders() const noexcept { return orders_; }
    [[nodiscard]] const Vector& x0() const noexcept { return x0_; }
    [[nodiscard]] const Vector& x0_deriv() const noexcept { return x0_deriv_; }

    [[nodiscard]] Eigen::Index states() const noexcept { return a_.rows(); }
    [[nodiscard]] Eigen::Index inputs() const noexcept { return b_.cols(); }
    [[nodiscard]] Eigen::Index outputs() const noexcept { return c_.rows(); }

private:
    Matrix a_, b_, c_;
    std::vector<RationalOrder> orders_;
    Vector x0_, x0_deriv_;
};

/// Single-order realization D^{alpha_c} Z = Abig Z + Bbig u, y = Cbig Z.
struct CommensurateRealization {
    Matrix a_big;
    Matrix b_big;
    Matrix c_big;
    RationalOrder alpha_c{1, 2};
    std::vector<int> p;
    int dimension = 0; ///< N = sum(p)
    Vector z0;
};

struct LiftOptions {
    int max_dimension = 512;
};

namespace detail {

inline std::vector<int> block_offsets(std::span<const int> blocks) {
    std::vector<int> offsets(blocks.size() + 1, 0);
    std::partial_sum(blocks.begin(), blocks.end(), offsets.begin() + 1);
    return offsets;
}

inline std::vector<int> checked_blocks(std::span<const RationalOrder> orders, const LiftOptions& options) {
    auto base = commensurate_base(orders);
    std::int64_t total = 0;
    for (int p : base.multiplicity) total += p;
    if (total > options.max_dimension) {
        throw RangeError("lifted dimension " + std::to_string(total) + " exceeds the limit of " +
                         std::to_string(options.max_dimension) + " (base order " +
                         base.alpha_c.to_string() + ")");
    }
    return std::move(base.multiplicity);
}

} // namespace detail

/// Block lifting with explicit block sizes. Diagonal block i is a p_i x p_i
/// shift with a_ii in its bottom-left corner; off-diagonal block (i, j)
/// holds a_ij in its bottom-left corner.
inline Matrix expand_state_matrix(const Matrix& a, std::span<const int> blocks) {
    const auto n = static_cast<Eigen::Index>(blocks.size());
    if (a.rows() != n || a.cols() != n) {
        throw DimensionError("A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " but " + std::to_string(n) + " blocks were given");
    }
    const auto off = detail::block_offsets(blocks);
    const int big = off.back();
    Matrix out = Matrix::Zero(big, big);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int row0 = off[static_cast<std::size_t>(i)];
        const int pi = blocks[static_cast<std::size_t>(i)];
        for (int k = 0; k + 1 < pi; ++k) out(row0 + k, row0 + k + 1) = 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            out(row0 + pi - 1, off[static_cast<std::size_t>(j)]) = a(i, j);
        }
    }
    return out;
}

inline Matrix expand_state_matrix(const Matrix& a, std::span<const RationalOrder> orders,
                                  const LiftOptions& options = {}) {
    const auto blocks = detail::checked_blocks(orders, options);
    return expand_state_matrix(a, std::span<const int>(blocks));
}

/// B row i goes to the last row of block i; C column j to the first column
/// of block j.
inline std::pair<Matrix, Matrix> expand_input_output(const Matrix& b, const Matrix& c,
                                                     std::span<const int> blocks) {
    const auto n = static_cast<Eigen::Index>(blocks.size());
    if (b.rows() != n || c.cols() != n) throw DimensionError("B/C shape does not match block count");
    const auto off = detail::block_offsets(blocks);
    const int big = off.back();
    Matrix b_big = Matrix::Zero(big, b.cols());
    Matrix c_big = Matrix::Zero(c.rows(), big);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        b_big.row(off[idx] + blocks[idx] - 1) = b.row(i);
        c_big.col(off[idx]) = c.col(i);
    }
    return {std::move(b_big), std::move(c_big)};
}

inline std::pair<Matrix, Matrix> expand_input_output(const Matrix& b, const Matrix& c,
                                                     std::span<const RationalOrder> orders,
                                                     const LiftOptions& options = {}) {
    const auto blocks = detail::checked_blocks(orders, options);
    return expand_input_output(b, c, std::span<const int>(blocks));
}

/// Lifted initial state: z_{i,1} = x0_i, z_{i,k} = x0_deriv_i when
/// (k-1) alpha_c == 1 exactly, zero otherwise.
inline Vector lift_initial_conditions(const Vector& x0, const Vector& x0_deriv,
                                      std::span<const RationalOrder> orders,
                                      const LiftOptions& options = {}) {
    const auto n = static_cast<Eigen::Index>(orders.size());
    if (x0.size() != n || x0_deriv.size() != n) throw DimensionError("initial conditions must have length n");
    const auto base = commensurate_base(orders);
    const auto blocks = detail::checked_blocks(orders, options);
    const auto off = detail::block_offsets(blocks);

    // (k-1) * num / den == 1  <=>  den % num == 0 and k - 1 == den / num
    const std::int64_t num = base.alpha_c.numerator();
    const std::int64_t den = base.alpha_c.denominator();
    const int unit_index = (den % num == 0) ? static_cast<int>(den / num) : -1; // zero-based k-1

    Vector z0 = Vector::Zero(off.back());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        z0(off[idx]) = x0(i);
        if (unit_index > 0 && unit_index < blocks[idx]) z0(off[idx] + unit_index) = x0_deriv(i);
    }
    return z0;
}

inline CommensurateRealization lift(const MultiOrderSystem& system, const LiftOptions& options = {}) {
    const auto base = commensurate_base(system.orders());
    const auto blocks = detail::checked_blocks(system.orders(), options);
    CommensurateRealization out;
    out.alpha_c = base.alpha_c;
    out.p = blocks;
    out.dimension = std::accumulate(blocks.begin(), blocks.end(), 0);
    out.a_big = expand_state_matrix(system.a(), std::span<const int>(blocks));
    std::tie(out.b_big, out.c_big) = expand_input_output(system.b(), system.c(), std::span<const int>(blocks));
    out.z0 = lift_initial_conditions(system.x0(), system.x0_deriv(), system.orders(), options);
    return out;
}

} // namespace fracstab

#endif // FRACSTAB_MODEL_HPP
