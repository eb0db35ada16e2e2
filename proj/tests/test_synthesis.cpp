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
#include <random>

#include <gtest/gtest.h>

#include "fracstab/stability.hpp"
#include "fracstab/synthesis.hpp"
#include "test_support.hpp"

using namespace fracstab;
using fracstab::fixtures::mat;

namespace {

Eigen::MatrixXcd random_pd_hermitian(std::mt19937_64& g, Eigen::Index n) {
    Eigen::MatrixXcd z(n, n);
    z.real() = fixtures::uniform(g, n, n, -1, 1);
    z.imag() = fixtures::uniform(g, n, n, -1, 1);
    return z * z.adjoint() + static_cast<double>(n) * Eigen::MatrixXcd::Identity(n, n);
}

} // namespace

TEST(AssembleClosedLoop, StaticGainOfThirdExample) {
    const auto closed = assemble_closed_loop(fixtures::example3(), fixtures::reference_controller(0));
    const Matrix expected = mat(2, 2, {-4.68, 1, -6.12, -2});
    EXPECT_LT((closed.a() - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(closed.states(), 2);
    EXPECT_EQ(closed.inputs(), 0);
    EXPECT_EQ(closed.outputs(), 1);
}

TEST(AssembleClosedLoop, ZeroAndDecoupledControllers) {
    const auto plant = fixtures::example3();
    const auto zero = ControllerRealization::static_gain(Matrix::Zero(1, 1), RationalOrder(3, 10));
    EXPECT_EQ(assemble_closed_loop(plant, zero).a(), plant.a());

    ControllerRealization k;
    k.alpha_c = RationalOrder(3, 10);
    k.ac = mat(1, 1, {-5});
    k.bc = Matrix::Zero(1, 1);
    k.cc = Matrix::Zero(1, 1);
    k.dc = mat(1, 1, {0.5});
    const auto closed = assemble_closed_loop(plant, k);
    Matrix expected = Matrix::Zero(3, 3);
    expected.topLeftCorner(2, 2) = plant.a() + plant.b() * k.dc * plant.c();
    expected(2, 2) = -5;
    EXPECT_EQ(closed.a(), expected);
    ASSERT_EQ(closed.orders().size(), 3u);
    EXPECT_EQ(closed.orders()[2], RationalOrder(3, 10));
}

TEST(AssembleClosedLoop, Mismatches) {
    const auto plant = fixtures::example3();
    EXPECT_THROW(assemble_closed_loop(plant, ControllerRealization::static_gain(Matrix::Zero(2, 1), RationalOrder(3, 10))),
                 DimensionError);
    EXPECT_THROW(assemble_closed_loop(plant, ControllerRealization::static_gain(Matrix::Zero(1, 1), RationalOrder(1, 2))),
                 RangeError);
}

TEST(ExpandClosedLoop, BothPathsAgreeOnReferenceControllers) {
    const auto plant = fixtures::example3();
    const auto lifted = lift(plant);
    for (int nc = 0; nc <= 2; ++nc) {
        const auto k = fixtures::reference_controller(nc);
        const Matrix via_f = expand_closed_loop(assemble_closed_loop(plant, k));
        const Matrix via_blocks = closed_loop_block_formula(lifted, k);
        ASSERT_EQ(via_f.rows(), 7 + nc);
        EXPECT_EQ(via_f, via_blocks);
    }
    const auto zero = ControllerRealization::static_gain(Matrix::Zero(1, 1), RationalOrder(3, 10));
    EXPECT_EQ(expand_closed_loop(assemble_closed_loop(plant, zero)), lifted.a_big);
}

TEST(ExpandClosedLoop, BothPathsAgreeOnRandomPairs) {
    std::mt19937_64 g = fixtures::rng(40);
    std::uniform_int_distribution<int> io(1, 2), order(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const auto plant = fixtures::random_system(g, 3, 12, io(g), io(g));
        const auto lifted = lift(plant);
        const auto k = fixtures::random_controller(g, order(g), plant.inputs(), plant.outputs(), lifted.alpha_c);
        EXPECT_EQ(expand_closed_loop(assemble_closed_loop(plant, k)), closed_loop_block_formula(lifted, k));
    }
}

TEST(ReferenceControllers, StabilizeTheThirdExample) {
    const auto plant = fixtures::example3();
    for (int nc = 0; nc <= 2; ++nc) {
        const auto v = spectral_stability_check(assemble_closed_loop(plant, fixtures::reference_controller(nc)));
        EXPECT_TRUE(v.stable()) << "nc " << nc << " margin " << v.margin;
        EXPECT_GT(v.margin, 0.0);
    }
}

TEST(BuildSynthesisLmi, StaticCaseDropsControllerBlocks) {
    const auto r = lift(fixtures::example3());
    const auto lmi = build_synthesis_lmi(r.a_big, r.b_big, r.c_big, 0, r.alpha_c);
    EXPECT_FALSE(lmi.p_c.has_value());
    EXPECT_FALSE(lmi.w1.has_value());
    EXPECT_EQ(lmi.problem.parameter_count(), 49 + 7);
    EXPECT_EQ(lmi.problem.constraints.size(), 2u);
    const auto dynamic = build_synthesis_lmi(r.a_big, r.b_big, r.c_big, 2, r.alpha_c);
    EXPECT_EQ(dynamic.problem.parameter_count(), 49 + 4 + 4 + 14 + 2 + 7);
    EXPECT_EQ(dynamic.problem.constraints.size(), 3u);
    EXPECT_EQ(dynamic.problem.constraints.back().expression.rows(), 9);
}

TEST(RecoverController, ExactWhenVariablesFactorThroughC) {
    std::mt19937_64 g = fixtures::rng(41);
    const RationalOrder alpha(2, 5);
    const double theta = sector_angle(alpha);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index big = 5, m = 2, l = 2, nc = 1 + trial % 3;
        const Matrix c_big = fixtures::uniform(g, m, big, -1, 1); // full row rank almost surely
        SynthesisAssignment a;
        a.p_s = random_pd_hermitian(g, big);
        a.p_c = random_pd_hermitian(g, nc);
        const Matrix q_s = rotated_real_part(a.p_s, theta);
        const Matrix q_c = rotated_real_part(a.p_c, theta);
        const Matrix ac0 = fixtures::uniform(g, nc, nc, -1, 1), bc0 = fixtures::uniform(g, nc, m, -1, 1);
        const Matrix cc0 = fixtures::uniform(g, l, nc, -1, 1), dc0 = fixtures::uniform(g, l, m, -1, 1);
        a.w1 = ac0 * q_c;
        a.w2 = bc0 * c_big * q_s;
        a.w3 = cc0 * q_c;
        a.w4 = dc0 * c_big * q_s;
        const auto rec = recover_controller(a, c_big, alpha);
        EXPECT_LT((rec.controller.ac - ac0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((rec.controller.bc - bc0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((rec.controller.cc - cc0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LT((rec.controller.dc - dc0).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE(rec.residual, 1e-9);
        EXPECT_LE(rec.relative_residual, 1e-6);
    }
}

TEST(RecoverController, StaticOrderRecoversOnlyTheGain) {
    std::mt19937_64 g = fixtures::rng(42);
    const RationalOrder alpha(3, 10);
    SynthesisAssignment a;
    a.p_s = random_pd_hermitian(g, 3);
    a.p_c = Eigen::MatrixXcd(0, 0);
    a.w1 = Matrix(0, 0);
    a.w2 = Matrix(0, 3);
    a.w3 = Matrix(1, 0);
    const Matrix c_big = mat(1, 3, {1, 0, 0});
    a.w4 = mat(1, 1, {0.7}) * c_big * rotated_real_part(a.p_s, sector_angle(alpha));
    const auto rec = recover_controller(a, c_big, alpha);
    EXPECT_EQ(rec.controller.order(), 0);
    EXPECT_EQ(rec.controller.bc.rows(), 0);
    EXPECT_NEAR(rec.controller.dc(0, 0), 0.7, 1e-12);
}

TEST(RecoverController, SingularQIsARecoveryFailure) {
    SynthesisAssignment a;
    a.p_s = Eigen::MatrixXcd::Zero(2, 2);
    a.p_c = Eigen::MatrixXcd(0, 0);
    a.w1 = Matrix(0, 0);
    a.w2 = Matrix(0, 2);
    a.w3 = Matrix(1, 0);
    a.w4 = Matrix::Zero(1, 2);
    EXPECT_THROW(recover_controller(a, mat(1, 2, {1, 0}), RationalOrder(1, 2)), RecoveryError);
}

TEST(Synthesize, ThirdExampleAtEachOrder) {
    const auto plant = fixtures::example3();
    for (int nc = 0; nc <= 2; ++nc) {
        const auto result = synthesize(plant, nc);
        ASSERT_TRUE(result.success()) << "nc " << nc << ": " << result.message;
        ASSERT_TRUE(result.controller.has_value());
        EXPECT_EQ(result.controller->order(), nc);
        // independent re-check of the returned controller
        const auto v = spectral_stability_check(assemble_closed_loop(plant, *result.controller));
        EXPECT_TRUE(v.stable());
        EXPECT_NEAR(v.margin, result.closed_loop_verdict->margin, 1e-9);
    }
}

TEST(Synthesize, AlreadyStablePlantWithStaticOrder) {
    const auto result = synthesize(fixtures::example2(), 0);
    ASSERT_TRUE(result.success()) << result.message;
    EXPECT_TRUE(result.closed_loop_verdict->stable());
}

TEST(Synthesize, NoInputAuthorityIsInfeasible) {
    const MultiOrderSystem plant(mat(1, 1, {1}), mat(1, 1, {0}), mat(1, 1, {1}), fixtures::orders({"0.5"}));
    const auto result = synthesize(plant, 0);
    EXPECT_EQ(result.status, SynthesisStatus::infeasible);
    EXPECT_NE(result.message.find("only sufficient"), std::string::npos);
    EXPECT_FALSE(result.controller.has_value());
}

TEST(Synthesize, RequiresInputsAndOutputs) {
    EXPECT_THROW(synthesize(fixtures::example1(), 0), DimensionError);
}

TEST(Synthesize, ExactRecoveryWithFullStateOutput) {
    // C = I on a commensurate plant makes Cbig invertible, so the structured
    // problem is no more conservative and the residual gate must pass
    std::mt19937_64 g = fixtures::rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + trial % 2;
        const MultiOrderSystem plant(fixtures::uniform(g, n, n, -1, 2), fixtures::uniform(g, n, 1, -1, 1),
                                     Matrix::Identity(n, n),
                                     std::vector<RationalOrder>(static_cast<std::size_t>(n), RationalOrder(1, 2)));
        SynthesisOptions options;
        options.lmi.exact_recovery = true;
        const auto result = synthesize(plant, trial % 2, options);
        ASSERT_TRUE(result.success()) << result.message;
        EXPECT_LE(result.relative_residual, options.residual_tolerance);
    }
}

TEST(Synthesize, ExactRecoveryOnThirdExampleNeverReturnsAnUnverifiedController) {
    SynthesisOptions options;
    options.lmi.exact_recovery = true;
    const auto result = synthesize(fixtures::example3(), 0, options);
    if (result.success()) {
        EXPECT_LE(result.relative_residual, options.residual_tolerance);
        EXPECT_TRUE(result.closed_loop_verdict->stable());
    } else {
        EXPECT_NE(result.status, SynthesisStatus::verification_failed);
    }
}

TEST(SynthesisProperty, EverySuccessIsSpectrallyStable) {
    std::mt19937_64 g = fixtures::rng(44);
    int successes = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const auto plant = fixtures::random_system(g, 2, 6, 1, 1);
        const auto result = synthesize(plant, trial % 2);
        if (!result.success()) continue;
        ++successes;
        EXPECT_TRUE(spectral_stability_check(assemble_closed_loop(plant, *result.controller)).stable());
    }
    EXPECT_GT(successes, 0);
}
