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
#ifndef FRACSTAB_SIMULATION_HPP
#define FRACSTAB_SIMULATION_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "fracstab/model.hpp"
#include "fracstab/synthesis.hpp"

namespace fracstab {

/// Grunwald-Letnikov weights w_0..w_{count-1} of (1 - xi)^alpha.
inline std::vector<double> gl_weights(double alpha, int count) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw RangeError("gl_weights: alpha must lie in (0, 1]");
    if (count < 1) throw RangeError("gl_weights: count must be positive");
    std::vector<double> w(static_cast<std::size_t>(count));
    w[0] = 1.0;
    for (int j = 1; j < count; ++j) {
        w[static_cast<std::size_t>(j)] = (1.0 - (alpha + 1.0) / j) * w[static_cast<std::size_t>(j - 1)];
    }
    return w;
}

enum class GlScheme {
    explicit_euler, ///< right-hand side evaluated at the previous step
    implicit_euler  ///< right-hand side evaluated at the new step (one linear solve per step)
};

struct SimConfig {
    double step = 1e-3;
    double t_final = 10.0;
    std::optional<int> memory_length; ///< nullopt = full history
    GlScheme scheme = GlScheme::explicit_euler;
    double divergence_threshold = 1e12;
};

struct Trajectory {
    Vector times;
    Matrix states;  ///< steps x N lifted pseudo-states
    Matrix outputs; ///< steps x m
    Matrix inputs;  ///< steps x l
    bool diverged = false;
    std::string diagnostic;
};

/// Input signal u(t); an empty function means u = 0.
using InputSignal = std::function<Vector(double)>;

/**
 * Grunwald-Letnikov stepping of D^{alpha_c} Z = Abig Z + Bbig u on the shifted
 * variable Z - z0 (Caputo initial values):
 *
 *   Z_k = z0 - sum_{j=1..k} w_j (Z_{k-j} - z0) + h^alpha (Abig Z_* + Bbig u_*)
 *
 * with * = k-1 (explicit) or k (implicit). Stops early, keeping the rows
 * computed so far, once |Z_k|_inf exceeds the divergence threshold.
 */
inline Trajectory simulate_commensurate(const CommensurateRealization& realization, const InputSignal& input,
                                        const SimConfig& config) {
    if (!(config.step > 0.0) || !(config.t_final > 0.0)) throw RangeError("step and t_final must be positive");
    const double alpha = realization.alpha_c.value();
    if (alpha > 1.0) throw RangeError("simulation supports base orders in (0, 1]");
    const auto big = realization.a_big.rows();
    const auto l = realization.b_big.cols();
    if (realization.z0.size() != big) throw DimensionError("z0 does not match the realization");

    const int steps = static_cast<int>(std::llround(config.t_final / config.step));
    if (steps < 1) throw RangeError("t_final must cover at least one step");
    const auto w = gl_weights(alpha, steps + 1);
    // reversed weights: rev[steps - j] = w_j for j = 1..steps
    Vector rev(steps);
    for (int j = 1; j <= steps; ++j) rev(steps - j) = w[static_cast<std::size_t>(j)];
    const int memory = config.memory_length ? std::max(1, *config.memory_length) : steps;

    auto u_at = [&](double t) -> Vector {
        if (!input || l == 0) return Vector::Zero(l);
        Vector u = input(t);
        if (u.size() != l) throw DimensionError("input signal has wrong length");
        return u;
    };

    const double ha = std::pow(config.step, alpha);
    Eigen::PartialPivLU<Matrix> implicit_lu;
    if (config.scheme == GlScheme::implicit_euler) {
        implicit_lu.compute(Matrix::Identity(big, big) - ha * realization.a_big);
    }

    Trajectory traj;
    traj.times.resize(steps + 1);
    Matrix shifted(big, steps + 1); // columns Z_k - z0
    Matrix inputs(l, steps + 1);
    shifted.col(0).setZero();
    inputs.col(0) = u_at(0.0);
    traj.times(0) = 0.0;

    int last = 0;
    for (int k = 1; k <= steps; ++k) {
        const double t = k * config.step;
        traj.times(k) = t;
        inputs.col(k) = u_at(t);
        const int span = std::min(k, memory);
        // sum_{j=1..span} w_j (Z_{k-j} - z0)
        const Vector history = shifted.middleCols(k - span, span) * rev.segment(steps - span, span);
        Vector rhs = realization.z0 - history;
        if (config.scheme == GlScheme::explicit_euler) {
            const Vector prev = shifted.col(k - 1) + realization.z0;
            rhs += ha * (realization.a_big * prev + realization.b_big * inputs.col(k - 1));
            shifted.col(k) = rhs - realization.z0;
        } else {
            rhs += ha * (realization.b_big * inputs.col(k));
            shifted.col(k) = implicit_lu.solve(rhs) - realization.z0;
        }
        last = k;
        const double size = (shifted.col(k) + realization.z0).cwiseAbs().maxCoeff();
        if (!std::isfinite(size) || size > config.divergence_threshold) {
            traj.diverged = true;
            char buf[128];
            std::snprintf(buf, sizeof buf, "state norm exceeded %.3g at t = %.6g", config.divergence_threshold, t);
            traj.diagnostic = buf;
            break;
        }
    }

    const int rows = last + 1;
    traj.times.conservativeResize(rows);
    traj.states = (shifted.leftCols(rows).colwise() + realization.z0).transpose();
    traj.outputs = traj.states * realization.c_big.transpose();
    traj.inputs = inputs.leftCols(rows).transpose();
    return traj;
}

/// Closed-loop response of plant + controller from the plant's initial
/// condition. `inputs` holds the controller output u = Cc x_c + Dc y.
struct ClosedLoopTrajectory {
    Trajectory trajectory;
    CommensurateRealization realization; ///< lifted closed loop
    std::vector<int> plant_columns;      ///< column of z_{i,1} for each plant state
};

inline ClosedLoopTrajectory simulate_closed_loop(const MultiOrderSystem& system, const ControllerRealization& controller,
                                                 const SimConfig& config, const LiftOptions& lift_options = {}) {
    const auto closed = assemble_closed_loop(system, controller);
    ClosedLoopTrajectory out;
    out.realization = lift(closed, lift_options);
    out.trajectory = simulate_commensurate(out.realization, {}, config);

    int offset = 0;
    for (Eigen::Index i = 0; i < system.states(); ++i) {
        out.plant_columns.push_back(offset);
        offset += out.realization.p[static_cast<std::size_t>(i)];
    }
    const auto nc = controller.order();
    const auto& states = out.trajectory.states;
    const Matrix controller_states = states.rightCols(nc);
    out.trajectory.inputs = out.trajectory.outputs * controller.dc.transpose() + controller_states * controller.cc.transpose();
    return out;
}

/// E_alpha(z) = sum_k z^k / Gamma(alpha k + 1) by direct series summation.
inline double mittag_leffler(double alpha, double z) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw RangeError("mittag_leffler: alpha must lie in (0, 2)");
    if (!(std::abs(z) <= 10.0)) throw RangeError("mittag_leffler: |z| must not exceed 10");
    if (z == 0.0) return 1.0;
    // terms in extended precision: the alternating series cancels terms
    // far larger than the result, and lgamma-based magnitudes lose digits
    const long double az = std::abs(static_cast<long double>(z));
    const long double log_abs = std::log(az);
    auto magnitude_of = [&](int k) {
        const long double g = static_cast<long double>(alpha) * k + 1.0L;
        if (g < 1700.0L) return std::pow(az, static_cast<long double>(k)) / std::tgamma(g);
        return std::exp(k * log_abs - std::lgamma(g));
    };
    // Neumaier compensated summation
    long double sum = 0.0L, comp = 0.0L;
    for (int k = 0; k < 100000; ++k) {
        const long double magnitude = magnitude_of(k);
        const long double term = (z < 0.0 && (k % 2 == 1)) ? -magnitude : magnitude;
        const long double s = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - s) + term : (term - s) + sum;
        sum = s;
        // past the peak the terms shrink at least geometrically with ratio
        // q < 1/2, so the tail is bounded by 2 |next term|
        const long double next = magnitude_of(k + 1);
        if (next < magnitude * 0.5L && 2.0L * next < 1e-17L) break;
    }
    return static_cast<double>(sum + comp);
}

/// CSV with header "t,z_1..z_N,y_1..y_m,u_1..u_l" and 10 significant digits.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t";
    for (Eigen::Index i = 0; i < traj.states.cols(); ++i) os << ",z_" << i + 1;
    for (Eigen::Index i = 0; i < traj.outputs.cols(); ++i) os << ",y_" << i + 1;
    for (Eigen::Index i = 0; i < traj.inputs.cols(); ++i) os << ",u_" << i + 1;
    os << "\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        os << buf;
    };
    for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
        put(traj.times(k));
        for (Eigen::Index i = 0; i < traj.states.cols(); ++i) { os << ","; put(traj.states(k, i)); }
        for (Eigen::Index i = 0; i < traj.outputs.cols(); ++i) { os << ","; put(traj.outputs(k, i)); }
        for (Eigen::Index i = 0; i < traj.inputs.cols(); ++i) { os << ","; put(traj.inputs(k, i)); }
        os << "\n";
    }
    if (traj.diverged) os << "# diverged: " << traj.diagnostic << "\n";
}

} // namespace fracstab

#endif // FRACSTAB_SIMULATION_HPP
