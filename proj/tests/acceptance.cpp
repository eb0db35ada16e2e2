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
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fracstab/simulation.hpp"
#include "fracstab/stability.hpp"
#include "fracstab/synthesis.hpp"
#include "test_support.hpp"

using namespace fracstab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), s);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double ml_half(double t) { return mittag_leffler(0.5, -std::sqrt(t)); }

double scalar_error(double h, double t) {
    SimConfig config;
    config.step = h;
    config.t_final = t;
    Vector x0 = Vector::Ones(1);
    const MultiOrderSystem plant(fixtures::mat(1, 1, {-1}), Matrix(), Matrix(), {RationalOrder(1, 2)}, x0);
    const auto traj = simulate_commensurate(lift(plant), {}, config);
    return std::abs(traj.states(traj.states.rows() - 1, 0) - ml_half(t));
}

} // namespace

int main() {
    std::printf("fracstab acceptance, seed %llu\n", static_cast<unsigned long long>(fixtures::seed()));

    criterion(1, "first example lifting", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = lift(fixtures::example1());
        const double s = seconds_since(t0);
        const bool ok = r.alpha_c == RationalOrder(31, 100) && r.p == std::vector<int>{3, 5, 4} && r.dimension == 12;
        return Outcome{ok && s < 1.0, "alpha_c = " + std::to_string(r.alpha_c.numerator()) + "/" +
                                          std::to_string(r.alpha_c.denominator()) + ", N = " +
                                          std::to_string(r.dimension)};
    });

    criterion(2, "first example verdicts", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sys = fixtures::example1();
        const auto spectral = spectral_stability_check(sys);
        const auto lmi = lmi_stability_check(sys);
        const double s = seconds_since(t0);
        const bool ok = spectral.decision == Decision::unstable && lmi.decision == Decision::unstable && s < 10.0;
        return Outcome{ok, std::string("spectral ") + to_string(spectral.decision) + " (margin " +
                               fmt("%.4f", spectral.margin) + "), LMI " + to_string(lmi.decision) +
                               " (dual bound " + fmt("%.3g", lmi.margin) + ")"};
    });

    criterion(3, "first example characteristic polynomial", [] {
        const auto p = characteristic_polynomial(lift(fixtures::example1()).a_big);
        const std::vector<double> expected{1, 0, 0, -1, 3, 2, 0, -4.5, -2, 5.5, 0, 0, -10};
        double worst = p.size() == expected.size() ? 0.0 : 1e300;
        for (std::size_t i = 0; i < std::min(p.size(), expected.size()); ++i)
            worst = std::max(worst, std::abs(p[i] - expected[i]));
        return Outcome{worst <= 1e-6, fmt("max coefficient error %.2e", worst)};
    });

    criterion(4, "second example verdicts", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sys = fixtures::example2();
        const auto r = lift(sys);
        const auto spectral = spectral_stability_check(sys);
        const auto lmi = lmi_stability_check(sys);
        const double s = seconds_since(t0);
        const bool ok = r.alpha_c == RationalOrder(39, 100) && r.dimension == 5 && spectral.stable() && lmi.stable() &&
                        s < 10.0;
        return Outcome{ok, "N = " + std::to_string(r.dimension) + ", spectral " + to_string(spectral.decision) +
                               fmt(" (margin %.4f)", spectral.margin) + ", LMI " + to_string(lmi.decision)};
    });

    criterion(5, "third example synthesis", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto sys = fixtures::example3();
        const auto r = lift(sys);
        const auto open = spectral_stability_check(sys);
        bool ok = r.alpha_c == RationalOrder(3, 10) && r.dimension == 7 && open.decision == Decision::unstable;
        std::string detail = "open loop " + std::string(to_string(open.decision));
        for (int nc = 0; nc <= 2; ++nc) {
            const auto result = synthesize(sys, nc);
            bool stable = false;
            if (result.success()) {
                // independent re-check on the recovered controller
                stable = spectral_stability_check(assemble_closed_loop(sys, *result.controller)).stable();
            }
            ok = ok && stable;
            detail += "; nc=" + std::to_string(nc) + " " + to_string(result.status) +
                      (result.closed_loop_verdict ? fmt(" margin %.3f", result.closed_loop_verdict->margin) : "");
        }
        return Outcome{ok && seconds_since(t0) < 60.0, detail};
    });

    criterion(6, "reference controllers", [] {
        bool ok = true;
        std::string detail;
        for (int nc = 0; nc <= 2; ++nc) {
            const auto v = spectral_stability_check(assemble_closed_loop(fixtures::example3(), fixtures::reference_controller(nc)));
            ok = ok && v.stable() && v.margin > 0.0;
            detail += (nc ? ", " : "") + std::string("nc=") + std::to_string(nc) + fmt(" margin %.4f", v.margin);
        }
        return Outcome{ok, detail};
    });

    criterion(7, "spectral and LMI verdicts agree", [] {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 g = fixtures::rng(700);
        int total = 0, agree = 0, stable = 0;
        std::string first_mismatch;
        while (total < 200) {
            const auto sys = fixtures::random_system(g, 3, 8);
            const auto spectral = spectral_stability_check(sys);
            if (std::abs(spectral.margin) <= 1e-3) continue;
            const auto lmi = lmi_stability_check(sys);
            ++total;
            stable += spectral.stable();
            if (lmi.decision == spectral.decision) {
                ++agree;
            } else if (first_mismatch.empty()) {
                first_mismatch = fmt("; first mismatch at case %.0f, spectral margin %.3g", total, spectral.margin) +
                                 " lmi " + to_string(lmi.decision);
            }
        }
        const double s = seconds_since(t0);
        return Outcome{agree == total && s < 300.0,
                       std::to_string(agree) + "/" + std::to_string(total) + " agree (" + std::to_string(stable) +
                           " stable)" + first_mismatch};
    });

    criterion(8, "simulator against Mittag-Leffler", [] {
        bool ok = true;
        double worst = 0.0, lo = 1e300, hi = 0.0;
        for (double t : {0.5, 1.0, 2.0}) {
            const double e = scalar_error(1e-3, t);
            const double ratio = e / scalar_error(5e-4, t);
            worst = std::max(worst, e);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            ok = ok && e <= 5e-3 && std::abs(ratio - 2.0) <= 0.4;
        }
        return Outcome{ok, fmt("max error %.2e at h=1e-3, halving ratios in [%.3f, %.3f]", worst, lo, hi)};
    });

    criterion(9, "closed-loop decay and open-loop divergence", [] {
        Vector x0(2);
        x0 << 1, 1;
        const auto plant = fixtures::example3(x0);
        SimConfig config;
        config.step = 1e-3;
        config.t_final = 20.0;
        config.scheme = GlScheme::implicit_euler;
        bool ok = true;
        std::string detail;
        for (int nc : {0, 1}) {
            const auto out = simulate_closed_loop(plant, fixtures::reference_controller(nc), config);
            const auto last = out.trajectory.states.rows() - 1;
            Vector x(2);
            for (int i = 0; i < 2; ++i) x(i) = out.trajectory.states(last, out.plant_columns[static_cast<std::size_t>(i)]);
            const double ratio = x.norm() / x0.norm();
            ok = ok && !out.trajectory.diverged && out.trajectory.times(last) >= 20.0 - 1e-9 && ratio < 0.05;
            detail += "nc=" + std::to_string(nc) + fmt(" final/initial %.4f; ", ratio);
        }
        const auto open = simulate_commensurate(lift(plant), {}, config);
        ok = ok && open.diverged;
        detail += open.diverged ? "open loop: " + open.diagnostic : "open loop did not diverge";
        return Outcome{ok, detail};
    });

    criterion(10, "closed-loop lifting paths agree", [] {
        std::mt19937_64 g = fixtures::rng(1000);
        std::uniform_int_distribution<int> io(1, 3), order(0, 3);
        int equal = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto plant = fixtures::random_system(g, 3, 12, io(g), io(g));
            const auto lifted = lift(plant);
            const auto k = fixtures::random_controller(g, order(g), plant.inputs(), plant.outputs(), lifted.alpha_c);
            equal += expand_closed_loop(assemble_closed_loop(plant, k)) == closed_loop_block_formula(lifted, k);
        }
        return Outcome{equal == 100, std::to_string(equal) + "/100 entrywise identical"};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
