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
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fracstab/lmi.hpp"
#include "fracstab/sdp.hpp"
#include "test_support.hpp"

using namespace fracstab;
using fracstab::fixtures::mat;

namespace {

Eigen::MatrixXcd random_hermitian(std::mt19937_64& g, int n) {
    const Matrix re = fixtures::uniform(g, n, n, -1, 1);
    const Matrix im = fixtures::uniform(g, n, n, -1, 1);
    Eigen::MatrixXcd z(n, n);
    z.real() = re;
    z.imag() = im;
    return 0.5 * (z + z.adjoint());
}

double min_eig(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

} // namespace

TEST(AffineMatrix, EvaluateAndAlgebra) {
    AffineMatrix e(Matrix::Identity(2, 2));
    e.add_term(0, mat(2, 2, {1, 2, 2, 1}));
    e.add_term(1, mat(2, 2, {0, 1, 1, 0}));
    Vector x(2);
    x << 2, -1;
    EXPECT_EQ(e.evaluate(x), mat(2, 2, {3, 3, 3, 3}));
    const AffineMatrix twice = 2.0 * e;
    EXPECT_EQ(twice.evaluate(x), mat(2, 2, {6, 6, 6, 6}));
    const AffineMatrix left = mat(1, 2, {1, 1}) * e;
    EXPECT_EQ(left.evaluate(x), mat(1, 2, {6, 6}));
    EXPECT_TRUE(e.is_symmetric());
    const AffineMatrix skew = mat(2, 2, {0, 1, 0, 0}) * e;
    EXPECT_EQ(skew.transpose().evaluate(x), skew.evaluate(x).transpose());
}

TEST(MatrixVariable, ParameterCounts) {
    LmiFeasibilityProblem p;
    const auto h = HermitianVariable::add_to(p, "X", 5);
    EXPECT_EQ(h.sym_part.parameter_count() + h.skew_part.parameter_count(), 25);
    const MatrixVariable w = p.add_variable("W", Structure::full, 2, 3);
    EXPECT_EQ(w.parameter_count(), 6);
    EXPECT_EQ(p.parameter_count(), 31);
    EXPECT_THROW(p.add_variable("bad", Structure::symmetric, 2, 3), DimensionError);
    EXPECT_THROW(static_cast<void>(p.variable("nope")), Error);
}

TEST(HermitianVariable, ValueIsHermitian) {
    LmiFeasibilityProblem p;
    const auto h = HermitianVariable::add_to(p, "X", 4);
    std::mt19937_64 g = fixtures::rng(20);
    const Vector x = fixtures::uniform(g, p.parameter_count(), 1, -1, 1);
    const Eigen::MatrixXcd v = h.value(x);
    EXPECT_LT((v - v.adjoint()).norm(), 1e-15);
}

TEST(Realify, ScalarIsTheScalar) {
    LmiFeasibilityProblem p;
    const auto h = HermitianVariable::add_to(p, "X", 1);
    const AffineMatrix e = realify_hermitian_pd(h);
    Vector x(1);
    x << 0.7;
    EXPECT_EQ(e.evaluate(x), mat(2, 2, {0.7, 0, 0, 0.7}));
}

TEST(Realify, IdentityAndSingularCases) {
    EXPECT_EQ(realify(Eigen::MatrixXcd::Identity(3, 3)), Matrix::Identity(6, 6));
    Eigen::MatrixXcd x(2, 2);
    x << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(1, 0);
    const Matrix r = realify(x);
    // eigenvalues of X are {0, 2}; each doubles in the embedding
    const auto ev = Eigen::SelfAdjointEigenSolver<Matrix>(r).eigenvalues();
    EXPECT_NEAR(ev(0), 0.0, 1e-14);
    EXPECT_NEAR(ev(1), 0.0, 1e-14);
    EXPECT_NEAR(ev(2), 2.0, 1e-14);
    EXPECT_NEAR(ev(3), 2.0, 1e-14);
}

TEST(LmiProperty, RotatedPartIsReal) {
    std::mt19937_64 g = fixtures::rng(21);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + trial % 6;
        const auto x = random_hermitian(g, n);
        const Complex r = std::polar(1.0, angle(g));
        const Eigen::MatrixXcd q = r * x + std::conj(r) * x.conjugate();
        EXPECT_LE(q.imag().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(LmiProperty, AffineRotatedPartMatchesComplexFormula) {
    std::mt19937_64 g = fixtures::rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 5;
        LmiFeasibilityProblem p;
        const auto h = HermitianVariable::add_to(p, "X", n);
        const Vector x = fixtures::uniform(g, p.parameter_count(), 1, -1, 1);
        const double theta = 0.1 + 0.02 * trial;
        const Complex r = std::polar(1.0, theta);
        const Eigen::MatrixXcd xv = h.value(x);
        const Eigen::MatrixXcd q = r * xv + std::conj(r) * xv.conjugate();
        EXPECT_LE((h.rotated_real_part(theta).evaluate(x) - q.real()).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(LmiProperty, EmbeddingPreservesMinimumEigenvalue) {
    std::mt19937_64 g = fixtures::rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 6;
        const auto x = random_hermitian(g, n);
        const double complex_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(x).eigenvalues()(0);
        EXPECT_NEAR(min_eig(realify(x)), complex_min, 1e-10);
    }
}

TEST(StabilityLmi, ScalarHandCheck) {
    const auto problem = build_stability_lmi(mat(1, 1, {-1}), RationalOrder(1, 2));
    ASSERT_EQ(problem.constraints.size(), 2u);
    Vector x(1);
    x << 1.0; // X = 1, Q = sqrt(2)
    const Matrix sector = problem.constraints[0].expression.evaluate(x);
    EXPECT_NEAR(sector(0, 0), -2.0 * std::sqrt(2.0), 1e-14);
}

TEST(StabilityLmi, RejectsBaseOrderOne) {
    EXPECT_THROW(build_stability_lmi(mat(1, 1, {-1}), RationalOrder(1, 1)), RangeError);
    EXPECT_THROW(sector_angle(RationalOrder(3, 2)), RangeError);
}

TEST(StabilityLmi, HomogeneityOfFeasibleAssignments) {
    const auto r = lift(fixtures::example2());
    const auto problem = build_stability_lmi(r.a_big, r.alpha_c);
    const auto result = solve_feasibility(problem);
    ASSERT_EQ(result.status, FeasibilityStatus::feasible);
    auto slack = [&problem](const Vector& x) {
        double s = std::numeric_limits<double>::infinity();
        for (const auto& c : problem.constraints) {
            const Matrix v = c.expression.evaluate(x);
            s = std::min(s, min_eig(c.sense == Sense::positive_definite ? v : Matrix(-v)));
        }
        return s;
    };
    const double s = slack(result.assignment);
    EXPECT_GE(s, problem.margin);
    for (double c : {1e-3, 0.5, 3.0, 1e3}) EXPECT_NEAR(slack(c * result.assignment), c * s, 1e-9 * c * std::abs(s));
}

TEST(StabilityLmi, DumpFormat) {
    const auto problem = build_stability_lmi(mat(1, 1, {-1}), RationalOrder(1, 2));
    std::ostringstream os;
    dump_problem(os, problem);
    const std::string text = os.str();
    EXPECT_NE(text.find("X.re"), std::string::npos);
    EXPECT_NE(text.find("sector"), std::string::npos);
    EXPECT_NE(text.find("-2.8284271247461903"), std::string::npos);
    EXPECT_EQ(text.substr(text.size() - 4), "end\n");
}
