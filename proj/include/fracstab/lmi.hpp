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
#ifndef FRACSTAB_LMI_HPP
#define FRACSTAB_LMI_HPP

#include <cmath>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fracstab/model.hpp"

namespace fracstab {

/**
 * @brief Matrix expression affine in a flat parameter vector x:
 *
 *   value(x) = constant + sum_i x_i * terms[i]
 *
 * Only parameters with a nonzero coefficient matrix are stored.
 */
class AffineMatrix {
public:
    AffineMatrix() = default;
    AffineMatrix(Eigen::Index rows, Eigen::Index cols) : constant_(Matrix::Zero(rows, cols)) {}
    explicit AffineMatrix(Matrix constant) : constant_(std::move(constant)) {}

    [[nodiscard]] Eigen::Index rows() const noexcept { return constant_.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return constant_.cols(); }
    [[nodiscard]] const Matrix& constant() const noexcept { return constant_; }
    [[nodiscard]] const std::map<int, Matrix>& terms() const noexcept { return terms_; }

    void add_term(int parameter, const Matrix& coefficient) {
        check_shape(coefficient.rows(), coefficient.cols());
        auto [it, inserted] = terms_.try_emplace(parameter, coefficient);
        if (!inserted) it->second += coefficient;
    }

    [[nodiscard]] Matrix evaluate(const Vector& x) const {
        Matrix out = constant_;
        for (const auto& [i, coeff] : terms_) out += x(i) * coeff;
        return out;
    }

    AffineMatrix& operator+=(const AffineMatrix& rhs) {
        check_shape(rhs.rows(), rhs.cols());
        constant_ += rhs.constant_;
        for (const auto& [i, coeff] : rhs.terms_) add_term(i, coeff);
        return *this;
    }

    friend AffineMatrix operator+(AffineMatrix lhs, const AffineMatrix& rhs) { return lhs += rhs; }

    friend AffineMatrix operator*(double s, AffineMatrix e) {
        e.constant_ *= s;
        for (auto& [i, coeff] : e.terms_) coeff *= s;
        return e;
    }

    friend AffineMatrix operator-(const AffineMatrix& lhs, const AffineMatrix& rhs) {
        return lhs + (-1.0) * rhs;
    }

    friend AffineMatrix operator*(const Matrix& left, const AffineMatrix& e) {
        if (left.cols() != e.rows()) throw DimensionError("affine product: inner dimensions differ");
        AffineMatrix out(left * e.constant_);
        for (const auto& [i, coeff] : e.terms_) out.terms_.emplace(i, left * coeff);
        return out;
    }

    friend AffineMatrix operator*(const AffineMatrix& e, const Matrix& right) {
        if (e.cols() != right.rows()) throw DimensionError("affine product: inner dimensions differ");
        AffineMatrix out(e.constant_ * right);
        for (const auto& [i, coeff] : e.terms_) out.terms_.emplace(i, coeff * right);
        return out;
    }

    [[nodiscard]] AffineMatrix transpose() const {
        AffineMatrix out(Matrix(constant_.transpose()));
        for (const auto& [i, coeff] : terms_) out.terms_.emplace(i, coeff.transpose());
        return out;
    }

    /// 2x2 block assembly; blocks may have zero rows or columns.
    static AffineMatrix blocks(const AffineMatrix& b11, const AffineMatrix& b12, const AffineMatrix& b21,
                               const AffineMatrix& b22) {
        if (b11.rows() != b12.rows() || b21.rows() != b22.rows() || b11.cols() != b21.cols() ||
            b12.cols() != b22.cols()) {
            throw DimensionError("affine block assembly: inconsistent block shapes");
        }
        const auto r1 = b11.rows(), c1 = b11.cols();
        AffineMatrix out(r1 + b21.rows(), c1 + b12.cols());
        auto place = [&out](const AffineMatrix& b, Eigen::Index r, Eigen::Index c) {
            out.constant_.block(r, c, b.rows(), b.cols()) = b.constant_;
            for (const auto& [i, coeff] : b.terms_) {
                auto [it, inserted] = out.terms_.try_emplace(i, Matrix::Zero(out.rows(), out.cols()));
                it->second.block(r, c, b.rows(), b.cols()) += coeff;
            }
        };
        place(b11, 0, 0);
        place(b12, 0, c1);
        place(b21, r1, 0);
        place(b22, r1, c1);
        return out;
    }

    [[nodiscard]] bool is_symmetric(double tol = 1e-12) const {
        if (rows() != cols()) return false;
        auto sym = [tol](const Matrix& m) { return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff()); };
        if (rows() == 0) return true;
        if (!sym(constant_)) return false;
        for (const auto& [i, coeff] : terms_) {
            if (!sym(coeff)) return false;
        }
        return true;
    }

private:
    void check_shape(Eigen::Index r, Eigen::Index c) const {
        if (r != rows() || c != cols()) throw DimensionError("affine expression shape mismatch");
    }

    Matrix constant_;
    std::map<int, Matrix> terms_;
};

enum class Structure { symmetric, skew_symmetric, full };

inline const char* to_string(Structure s) {
    switch (s) {
    case Structure::symmetric: return "symmetric";
    case Structure::skew_symmetric: return "skew-symmetric";
    case Structure::full: return "full";
    }
    return "?";
}

/// Named real matrix variable occupying parameters [offset, offset + count).
struct MatrixVariable {
    std::string name;
    Structure structure = Structure::full;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    int offset = 0;

    [[nodiscard]] int parameter_count() const noexcept {
        const auto n = static_cast<int>(rows);
        switch (structure) {
        case Structure::symmetric: return n * (n + 1) / 2;
        case Structure::skew_symmetric: return n * (n - 1) / 2;
        case Structure::full: return static_cast<int>(rows * cols);
        }
        return 0;
    }

    /// The variable itself as an affine expression.
    [[nodiscard]] AffineMatrix expression() const {
        AffineMatrix e(rows, cols);
        int k = offset;
        switch (structure) {
        case Structure::symmetric:
            for (Eigen::Index j = 0; j < cols; ++j) {
                for (Eigen::Index i = 0; i <= j; ++i) {
                    Matrix basis = Matrix::Zero(rows, cols);
                    basis(i, j) = 1.0;
                    basis(j, i) = 1.0;
                    e.add_term(k++, basis);
                }
            }
            break;
        case Structure::skew_symmetric:
            for (Eigen::Index j = 0; j < cols; ++j) {
                for (Eigen::Index i = 0; i < j; ++i) {
                    Matrix basis = Matrix::Zero(rows, cols);
                    basis(i, j) = 1.0;
                    basis(j, i) = -1.0;
                    e.add_term(k++, basis);
                }
            }
            break;
        case Structure::full:
            for (Eigen::Index j = 0; j < cols; ++j) {
                for (Eigen::Index i = 0; i < rows; ++i) {
                    Matrix basis = Matrix::Zero(rows, cols);
                    basis(i, j) = 1.0;
                    e.add_term(k++, basis);
                }
            }
            break;
        }
        return e;
    }

    /// Value of the variable at the flat parameter vector x.
    [[nodiscard]] Matrix value(const Vector& x) const { return expression().evaluate(x); }
};

enum class Sense {
    negative_definite, ///< expression <= -margin * I
    positive_definite  ///< expression >= +margin * I
};

struct LmiConstraint {
    std::string label;
    AffineMatrix expression;
    Sense sense = Sense::negative_definite;
};

/**
 * @brief Feasibility problem over real matrix variables with affine LMI
 * constraints and optional affine equalities (expression == 0).
 *
 * Strict inequalities are represented with `margin`; the homogeneous problems
 * built here are normalized by bounding every parameter by `variable_bound`.
 */
struct LmiFeasibilityProblem {
    std::vector<MatrixVariable> variables;
    std::vector<LmiConstraint> constraints;
    std::vector<AffineMatrix> equalities;
    double margin = 1e-6;
    double variable_bound = 1e4;

    [[nodiscard]] int parameter_count() const noexcept {
        return variables.empty() ? 0 : variables.back().offset + variables.back().parameter_count();
    }

    const MatrixVariable& add_variable(std::string name, Structure structure, Eigen::Index rows, Eigen::Index cols) {
        if (structure != Structure::full && rows != cols) throw DimensionError("structured variable must be square");
        variables.push_back({std::move(name), structure, rows, cols, parameter_count()});
        return variables.back();
    }

    [[nodiscard]] const MatrixVariable& variable(const std::string& name) const {
        for (const auto& v : variables) {
            if (v.name == name) return v;
        }
        throw Error("no LMI variable named " + name);
    }

    void add_constraint(std::string label, AffineMatrix expression, Sense sense) {
        if (!expression.is_symmetric()) throw Error("LMI constraint \"" + label + "\" is not symmetric");
        constraints.push_back({std::move(label), std::move(expression), sense});
    }
};

/// Complex Hermitian matrix variable X = S + iK with S symmetric and K
/// skew-symmetric; N^2 real parameters in total.
struct HermitianVariable {
    Eigen::Index dim = 0;
    MatrixVariable sym_part;
    MatrixVariable skew_part;

    static HermitianVariable add_to(LmiFeasibilityProblem& problem, const std::string& name, Eigen::Index dim) {
        HermitianVariable h;
        h.dim = dim;
        h.sym_part = problem.add_variable(name + ".re", Structure::symmetric, dim, dim);
        h.skew_part = problem.add_variable(name + ".im", Structure::skew_symmetric, dim, dim);
        return h;
    }

    /// r X + conj(r) conj(X) = 2 (cos(theta) S - sin(theta) K), a real matrix.
    [[nodiscard]] AffineMatrix rotated_real_part(double theta) const {
        return (2.0 * std::cos(theta)) * sym_part.expression() + (-2.0 * std::sin(theta)) * skew_part.expression();
    }

    [[nodiscard]] Eigen::MatrixXcd value(const Vector& x) const {
        Eigen::MatrixXcd out(dim, dim);
        out.real() = sym_part.value(x);
        out.imag() = skew_part.value(x);
        return out;
    }
};

/// Real 2N x 2N embedding ((S, -K), (K, S)) of X = S + iK; PD iff X is PD.
inline AffineMatrix realify_hermitian_pd(const HermitianVariable& x) {
    const AffineMatrix s = x.sym_part.expression();
    const AffineMatrix k = x.skew_part.expression();
    return AffineMatrix::blocks(s, (-1.0) * k, k, s);
}

/// Same embedding applied to a numeric Hermitian matrix.
inline Matrix realify(const Eigen::MatrixXcd& x) {
    const auto n = x.rows();
    Matrix out(2 * n, 2 * n);
    out << x.real(), -x.imag(), x.imag(), x.real();
    return out;
}

/// Rotation angle (1 - alpha) pi / 2 of the sector LMI.
inline double sector_angle(const RationalOrder& alpha_c) {
    if (alpha_c.value() >= 1.0) {
        throw RangeError("the LMI criterion needs a base order below 1 (got " + alpha_c.to_string() +
                         "); use the spectral test instead");
    }
    return (1.0 - alpha_c.value()) * std::numbers::pi / 2.0;
}

/**
 * Stability LMI of D^{alpha_c} Z = Abig Z:
 *   Q^T Abig^T + Abig Q <= -margin I,  Q = r X + conj(r) conj(X),
 *   realify(X) >= margin I.
 */
inline LmiFeasibilityProblem build_stability_lmi(const Matrix& a_big, const RationalOrder& alpha_c,
                                                 double margin = 1e-6, double variable_bound = 1e4) {
    if (a_big.rows() != a_big.cols()) throw DimensionError("build_stability_lmi: matrix must be square");
    const double theta = sector_angle(alpha_c);
    LmiFeasibilityProblem problem;
    problem.margin = margin;
    problem.variable_bound = variable_bound;
    const auto x = HermitianVariable::add_to(problem, "X", a_big.rows());
    const AffineMatrix q = x.rotated_real_part(theta);
    const AffineMatrix aq = a_big * q;
    problem.add_constraint("sector", aq + aq.transpose(), Sense::negative_definite);
    problem.add_constraint("X > 0", realify_hermitian_pd(x), Sense::positive_definite);
    return problem;
}

/// Plain-text dump of a problem: variables, then every constraint as its
/// constant and coefficient matrices in row-major order with 17 significant
/// digits.
inline void dump_problem(std::ostream& os, const LmiFeasibilityProblem& problem) {
    const auto old_precision = os.precision();
    os << std::setprecision(17);
    os << "parameters " << problem.parameter_count() << "\n";
    os << "margin " << problem.margin << "\nvariable_bound " << problem.variable_bound << "\n";
    for (const auto& v : problem.variables) {
        os << "variable " << v.name << " " << to_string(v.structure) << " " << v.rows << " " << v.cols
           << " offset " << v.offset << " count " << v.parameter_count() << "\n";
    }
    auto write_matrix = [&os](const Matrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
            os << "\n";
        }
    };
    auto write_expression = [&](const AffineMatrix& e) {
        os << "constant\n";
        write_matrix(e.constant());
        for (const auto& [i, coeff] : e.terms()) {
            os << "coefficient " << i << "\n";
            write_matrix(coeff);
        }
    };
    for (const auto& c : problem.constraints) {
        os << "constraint \"" << c.label << "\" "
           << (c.sense == Sense::negative_definite ? "<= -margin*I" : ">= margin*I") << " " << c.expression.rows()
           << "\n";
        write_expression(c.expression);
    }
    for (const auto& e : problem.equalities) {
        os << "equality " << e.rows() << " " << e.cols() << "\n";
        write_expression(e);
    }
    os << "end\n";
    os.precision(old_precision);
}

} // namespace fracstab

#endif // FRACSTAB_LMI_HPP
