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
#ifndef FRACSTAB_CLI_HPP
#define FRACSTAB_CLI_HPP

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracstab/document.hpp"
#include "fracstab/simulation.hpp"
#include "fracstab/stability.hpp"
#include "fracstab/svg.hpp"
#include "fracstab/synthesis.hpp"

namespace fracstab::cli {

/// Process exit codes.
enum ExitCode : int {
    kStable = 0,       ///< stable verdict or plain success
    kUnstable = 1,     ///< unstable, infeasible or diverged
    kUsage = 2,        ///< parse, usage or input error
    kInconclusive = 3, ///< solver could not decide
    kInconsistent = 4  ///< methods disagree, recovery or verification failure
};

class IoError : public Error {
public:
    using Error::Error;
};

inline std::string read_input(const std::string& path) {
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes `content` to a sibling temporary and renames it over `path`.
inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto '" + path + "'");
    }
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        write_atomic(path, content);
    }
}

inline Json eigen_list(const std::vector<Complex>& eigs) {
    Json out = Json::array();
    for (const auto& e : eigs) out.push_back(Json::array({e.real(), e.imag()}));
    return out;
}

inline Json verdict_json(const StabilityVerdict& v) {
    Json j = Json::object();
    j["method"] = to_string(v.method);
    j["decision"] = to_string(v.decision);
    j["stable"] = v.stable();
    j["margin"] = v.margin;
    j["boundary"] = v.boundary;
    if (v.method == StabilityMethod::spectral) j["eigenvalues"] = eigen_list(v.eigenvalues);
    if (!v.diagnostic.empty()) j["diagnostic"] = v.diagnostic;
    return j;
}

inline Json lifting_json(const CommensurateRealization& r) {
    Json j = Json::object();
    j["alpha_c"] = r.alpha_c.to_string();
    j["alpha_c_fraction"] = std::to_string(r.alpha_c.numerator()) + "/" + std::to_string(r.alpha_c.denominator());
    j["p"] = r.p;
    j["N"] = r.dimension;
    return j;
}

/// Wall-clock stopwatch; readings only ever land in the report's "timing" section.
class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct CommonFlags {
    std::string input;
    std::string output;
    double margin = 1e-6;
    double bound = 1e4;
    double max_weight = SolverOptions{}.max_weight;
    bool no_timing = false;
};

inline Json report_skeleton(const char* command, const SystemDocument& doc) {
    Json j = Json::object();
    j["command"] = command;
    j["input"] = document_to_json(doc);
    return j;
}

inline void finish_report(Json& report, const Json& timing, const CommonFlags& flags, std::ostream& out) {
    if (!flags.no_timing) report["timing"] = timing;
    emit(flags.output, report.dump(2) + "\n", out);
}

inline int cmd_expand(const CommonFlags& flags, std::ostream& out) {
    Stopwatch clock;
    const auto doc = parse_document(read_input(flags.input));
    const auto system = to_system(doc);
    const auto r = lift(system);
    Json report = report_skeleton("expand", doc);
    Json lifting = lifting_json(r);
    lifting["Abig"] = matrix_to_json(r.a_big);
    lifting["Bbig"] = matrix_to_json(r.b_big);
    lifting["Cbig"] = matrix_to_json(r.c_big);
    lifting["z0"] = vector_to_json(r.z0);
    report["lifting"] = std::move(lifting);
    finish_report(report, Json{{"total_seconds", clock.lap()}}, flags, out);
    return kStable;
}

struct StabilityFlags {
    std::string method = "spectral";
    std::string plot;
};

inline int cmd_stability(const CommonFlags& flags, const StabilityFlags& sf, std::ostream& out, std::ostream& err) {
    Stopwatch clock;
    const auto doc = parse_document(read_input(flags.input));
    const auto system = to_system(doc);
    const auto r = lift(system);
    Json report = report_skeleton("stability", doc);
    report["lifting"] = lifting_json(r);
    Json timing = Json::object();
    timing["lift_seconds"] = clock.lap();

    const bool run_spectral = sf.method == "spectral" || sf.method == "both";
    const bool run_lmi = sf.method == "lmi" || sf.method == "both";
    std::optional<StabilityVerdict> spectral, lmi;
    Json verdicts = Json::object();
    if (run_spectral) {
        spectral = argument_stability_test(r.a_big, r.alpha_c);
        verdicts["spectral"] = verdict_json(*spectral);
        timing["spectral_seconds"] = clock.lap();
        if (!sf.plot.empty()) {
            write_atomic(sf.plot, svg::eigenvalue_plot(spectral->eigenvalues, spectral->boundary,
                                                       "eigenvalues of the lifted matrix, alpha_c = " +
                                                           r.alpha_c.to_string()));
        }
    }
    if (run_lmi) {
        if (r.alpha_c.value() >= 1.0) {
            const std::string msg = "the LMI test needs a base order below 1 (alpha_c = " + r.alpha_c.to_string() +
                                    "); use --method spectral";
            if (!run_spectral) throw RangeError(msg);
            verdicts["lmi"] = Json{{"method", "lmi"}, {"decision", "skipped"}, {"diagnostic", msg}};
        } else {
            LmiCheckOptions options;
            options.margin = flags.margin;
            options.variable_bound = flags.bound;
            options.solver.max_weight = flags.max_weight;
            lmi = lmi_stability_check(system, options);
            verdicts["lmi"] = verdict_json(*lmi);
        }
        timing["lmi_seconds"] = clock.lap();
    }
    report["verdicts"] = verdicts;

    int code = kStable;
    if (spectral && lmi) {
        const bool decided = lmi->decision != Decision::inconclusive;
        if (decided && lmi->decision != spectral->decision) {
            if (std::abs(spectral->margin) > 1e-4) {
                report["consistency"] = "spectral and LMI verdicts disagree";
                err << "error: spectral and LMI verdicts disagree\n";
                code = kInconsistent;
            } else {
                report["consistency"] = "verdicts differ inside the boundary tolerance; spectral verdict reported";
            }
        } else {
            report["consistency"] = decided ? "agree" : "LMI inconclusive; spectral verdict reported";
        }
        if (code == kStable) code = spectral->stable() ? kStable : kUnstable;
    } else if (spectral) {
        code = spectral->stable() ? kStable : kUnstable;
    } else if (lmi) {
        code = lmi->decision == Decision::stable     ? kStable
               : lmi->decision == Decision::unstable ? kUnstable
                                                     : kInconclusive;
    }
    finish_report(report, timing, flags, out);
    return code;
}

struct SynthesizeFlags {
    int nc = 0;
    std::string controller_out;
    bool exact_recovery = false;
};

inline int cmd_synthesize(const CommonFlags& flags, const SynthesizeFlags& sf, std::ostream& out,
                          std::ostream& err) {
    Stopwatch clock;
    const auto doc = parse_document(read_input(flags.input));
    const auto system = to_system(doc);
    if (system.inputs() == 0 || system.outputs() == 0) throw ParseError("synthesis needs fields \"B\" and \"C\"");
    if (sf.nc < 0) throw RangeError("--nc must be nonnegative");
    const auto r = lift(system);
    Json report = report_skeleton("synthesize", doc);
    report["lifting"] = lifting_json(r);

    SynthesisOptions options;
    options.lmi.margin = flags.margin;
    options.lmi.variable_bound = flags.bound;
    options.lmi.exact_recovery = sf.exact_recovery;
    options.solver.max_weight = flags.max_weight;
    const auto result = synthesize(system, sf.nc, options);

    Json syn = Json::object();
    syn["nc"] = sf.nc;
    syn["status"] = to_string(result.status);
    if (!result.message.empty()) syn["message"] = result.message;
    syn["lmi_margin"] = result.lmi_margin;
    if (result.controller) {
        syn["controller"] = controller_to_json(*result.controller);
        syn["recovery_residual"] = result.recovery_residual;
        syn["relative_recovery_residual"] = result.relative_residual;
    }
    if (result.closed_loop_verdict) syn["closed_loop"] = verdict_json(*result.closed_loop_verdict);
    report["synthesis"] = std::move(syn);

    if (result.success() && !sf.controller_out.empty()) {
        SystemDocument exported = doc;
        exported.controller = to_block(*result.controller);
        write_atomic(sf.controller_out, document_to_json(exported).dump(2) + "\n");
    }
    finish_report(report, Json{{"total_seconds", clock.lap()}}, flags, out);

    switch (result.status) {
    case SynthesisStatus::success: return kStable;
    case SynthesisStatus::infeasible: err << result.message << "\n"; return kUnstable;
    case SynthesisStatus::inconclusive: err << result.message << "\n"; return kInconclusive;
    case SynthesisStatus::recovery_failed:
    case SynthesisStatus::verification_failed: err << "error: " << result.message << "\n"; return kInconsistent;
    }
    return kInconsistent;
}

struct SimulateFlags {
    double step = 1e-3;
    double t_final = 10.0;
    bool closed_loop = false;
    std::string scheme = "explicit";
    int memory = 0;
    std::string plot;
    std::string eig_plot;
};

inline int cmd_simulate(const CommonFlags& flags, const SimulateFlags& sf, std::ostream& out, std::ostream& err) {
    const auto doc = parse_document(read_input(flags.input));
    const auto system = to_system(doc);
    SimConfig config;
    config.step = sf.step;
    config.t_final = sf.t_final;
    config.scheme = sf.scheme == "implicit" ? GlScheme::implicit_euler : GlScheme::explicit_euler;
    if (sf.memory > 0) config.memory_length = sf.memory;

    Trajectory traj;
    CommensurateRealization realization;
    std::vector<int> plant_columns;
    Eigen::Index controller_states = 0;
    if (sf.closed_loop) {
        const auto controller = to_controller(doc, system);
        auto closed = simulate_closed_loop(system, controller, config);
        traj = std::move(closed.trajectory);
        realization = std::move(closed.realization);
        plant_columns = std::move(closed.plant_columns);
        controller_states = controller.order();
    } else {
        realization = lift(system);
        traj = simulate_commensurate(realization, {}, config);
        int offset = 0;
        for (int p : realization.p) {
            plant_columns.push_back(offset);
            offset += p;
        }
    }

    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    emit(flags.output, csv.str(), out);

    if (!sf.plot.empty()) {
        const auto cols = static_cast<Eigen::Index>(plant_columns.size()) + controller_states;
        Matrix series(traj.states.rows(), cols);
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < plant_columns.size(); ++i) {
            series.col(static_cast<Eigen::Index>(i)) = traj.states.col(plant_columns[i]);
            labels.push_back("x" + std::to_string(i + 1));
        }
        for (Eigen::Index k = 0; k < controller_states; ++k) {
            series.col(static_cast<Eigen::Index>(plant_columns.size()) + k) =
                traj.states.col(traj.states.cols() - controller_states + k);
            labels.push_back("xc" + std::to_string(k + 1));
        }
        write_atomic(sf.plot, svg::line_plot(traj.times, series, labels,
                                             sf.closed_loop ? "closed-loop pseudo-states" : "open-loop pseudo-states"));
    }
    if (!sf.eig_plot.empty()) {
        const auto verdict = argument_stability_test(realization.a_big, realization.alpha_c);
        write_atomic(sf.eig_plot, svg::eigenvalue_plot(verdict.eigenvalues, verdict.boundary,
                                                       "eigenvalues, alpha_c = " + realization.alpha_c.to_string()));
    }
    if (traj.diverged) {
        err << "diverged: " << traj.diagnostic << "\n";
        return kUnstable;
    }
    return kStable;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stability analysis and output-feedback synthesis for multi-order fractional LTI systems",
                 "fracstab"};
    app.require_subcommand(1);

    CommonFlags common;
    auto add_common = [&common](CLI::App* sub, bool lmi_flags) {
        sub->add_option("input", common.input, "system document (JSON), '-' for stdin")->required();
        sub->add_option("-o,--output", common.output, "output file (default stdout)");
        sub->add_flag("--no-timing", common.no_timing, "omit the timing section of the report");
        if (lmi_flags) {
            sub->add_option("--margin", common.margin, "strictness margin of the LMI constraints")
                ->check(CLI::PositiveNumber);
            sub->add_option("--bound", common.bound, "infinity-norm cap on the LMI variables")
                ->check(CLI::PositiveNumber);
            sub->add_option("--max-weight", common.max_weight, "barrier weight at which the LMI solver gives up")
                ->check(CLI::PositiveNumber);
        }
    };

    auto* expand = app.add_subcommand("expand", "lift to the commensurate realization");
    add_common(expand, false);

    StabilityFlags stab;
    auto* stability = app.add_subcommand("stability", "decide asymptotic stability");
    add_common(stability, true);
    stability->add_option("--method", stab.method, "spectral, lmi or both")
        ->check(CLI::IsMember({"spectral", "lmi", "both"}));
    stability->add_option("--plot", stab.plot, "write an eigenvalue SVG with the sector boundary");

    SynthesizeFlags syn;
    auto* synth = app.add_subcommand("synthesize", "dynamic output-feedback stabilizer synthesis");
    add_common(synth, true);
    synth->add_option("--nc", syn.nc, "controller order")->check(CLI::NonNegativeNumber);
    synth->add_option("--controller-out", syn.controller_out, "write plant plus controller document here");
    synth->add_flag("--exact-recovery", syn.exact_recovery, "constrain the LMI so that recovery is exact");

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Grunwald-Letnikov time response (CSV)");
    add_common(simulate, false);
    simulate->add_option("--step", sim.step, "step size")->check(CLI::PositiveNumber);
    simulate->add_option("--t-final", sim.t_final, "final time")->check(CLI::PositiveNumber);
    simulate->add_flag("--closed-loop", sim.closed_loop, "close the loop with the document's controller block");
    simulate->add_option("--scheme", sim.scheme, "explicit or implicit")
        ->check(CLI::IsMember({"explicit", "implicit"}));
    simulate->add_option("--memory", sim.memory, "history length in steps (0 = full)")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--plot", sim.plot, "write an SVG of the pseudo-states");
    simulate->add_option("--eig-plot", sim.eig_plot, "write an eigenvalue SVG of the simulated realization");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (expand->parsed()) return cmd_expand(common, out);
        if (stability->parsed()) return cmd_stability(common, stab, out, err);
        if (synth->parsed()) return cmd_synthesize(common, syn, out, err);
        if (simulate->parsed()) return cmd_simulate(common, sim, out, err);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kInconclusive;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInconsistent;
    }
    return kUsage;
}

} // namespace fracstab::cli

#endif // FRACSTAB_CLI_HPP
