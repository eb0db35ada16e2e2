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
#ifndef FRACSTAB_SPECTRAL_HPP
#define FRACSTAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fracstab/model.hpp"

namespace fracstab {

using Complex = std::complex<double>;

enum class StabilityMethod { spectral, lmi };

enum class Decision { stable, unstable, inconclusive };

inline const char* to_string(StabilityMethod m) { return m == StabilityMethod::spectral ? "spectral" : "lmi"; }

inline const char* to_string(Decision d) {
    switch (d) {
    case Decision::stable: return "stable";
    case Decision::unstable: return "unstable";
    case Decision::inconclusive: return "inconclusive";
    }
    return "?";
}

/**
 * @brief Outcome of a stability test on a commensurate realization.
 *
 * For the spectral method `margin` is min |arg(lambda)| - boundary in radians
 * and `stable` holds iff margin > 0. For the LMI method `margin` is the
 * solver's certificate margin and `eigenvalues` is empty.
 */
struct StabilityVerdict {
    Decision decision = Decision::inconclusive;
    StabilityMethod method = StabilityMethod::spectral;
    double margin = 0.0;
    double boundary = 0.0; ///< alpha_c * pi / 2
    std::vector<Complex> eigenvalues;
    std::string diagnostic;

    [[nodiscard]] bool stable() const noexcept { return decision == Decision::stable; }
};

struct EigenOptions {
    int max_dimension = 512;
    int iterations_per_row = 100;
};

/// All eigenvalues with multiplicity. Conjugate pairs of a real matrix are
/// returned exactly conjugate (positive imaginary part first).
inline std::vector<Complex> eigenvalues(const Matrix& m, const EigenOptions& options = {}) {
    if (m.rows() != m.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (m.rows() > options.max_dimension) throw RangeError("eigenvalues: dimension over cap");
    if (!m.allFinite()) throw RangeError("eigenvalues: matrix has non-finite entries");
    if (m.rows() == 0) return {};

    Eigen::EigenSolver<Matrix> solver;
    solver.setMaxIterations(options.iterations_per_row * static_cast<int>(m.rows()));
    solver.compute(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigenvalue iteration did not converge within " +
                               std::to_string(options.iterations_per_row * m.rows()) + " sweeps");
    }
    const auto& ev = solver.eigenvalues();
    std::vector<Complex> out(ev.data(), ev.data() + ev.size());
    return out;
}

/// Eigenvalue sector test: stable iff every eigenvalue satisfies
/// |arg(lambda)| > alpha_c * pi / 2. A (numerically) zero eigenvalue counts
/// as arg = 0.
inline StabilityVerdict argument_stability_test(const Matrix& m, const RationalOrder& alpha_c,
                                                const EigenOptions& options = {}) {
    StabilityVerdict verdict;
    verdict.method = StabilityMethod::spectral;
    verdict.boundary = alpha_c.value() * std::numbers::pi / 2.0;
    verdict.eigenvalues = eigenvalues(m, options);

    const double zero_tol = 1e-10 * std::max(m.norm(), std::numeric_limits<double>::min());
    double min_arg = std::numeric_limits<double>::infinity();
    for (const auto& lambda : verdict.eigenvalues) {
        const double a = std::abs(lambda) < zero_tol ? 0.0 : std::abs(std::arg(lambda));
        min_arg = std::min(min_arg, a);
    }
    verdict.margin = min_arg - verdict.boundary;
    verdict.decision = verdict.margin > 0.0 ? Decision::stable : Decision::unstable;
    return verdict;
}

/// Coefficients of det(sI - M), highest power first, via Faddeev-LeVerrier.
inline std::vector<double> characteristic_polynomial(const Matrix& m, int max_dimension = 64) {
    if (m.rows() != m.cols()) throw DimensionError("characteristic_polynomial: matrix must be square");
    const auto n = m.rows();
    if (n > max_dimension) {
        throw RangeError("characteristic_polynomial: dimension " + std::to_string(n) + " over cap " +
                         std::to_string(max_dimension));
    }
    std::vector<double> coeffs(static_cast<std::size_t>(n) + 1, 0.0);
    coeffs[0] = 1.0;
    Matrix mk = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        mk = m * mk;
        mk.diagonal().array() += coeffs[static_cast<std::size_t>(k - 1)];
        coeffs[static_cast<std::size_t>(k)] = -(m * mk).trace() / static_cast<double>(k);
    }
    return coeffs;
}

/// Companion matrix whose characteristic polynomial is the given monic
/// polynomial (coefficients highest power first).
inline Matrix companion(const std::vector<double>& monic) {
    if (monic.size() < 2 || monic.front() != 1.0) throw RangeError("companion: need a monic polynomial of degree >= 1");
    const auto n = static_cast<Eigen::Index>(monic.size() - 1);
    Matrix c = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) c(n - 1, j) = -monic[static_cast<std::size_t>(n - j)];
    return c;
}

} // namespace fracstab

#endif // FRACSTAB_SPECTRAL_HPP
