#pragma once

// The cellforge command line: emit, check, truthtable, sim, bench, size.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cellforge/cellforge.hpp"

namespace cellforge::cli {

enum ExitCode { kOk = 0, kUserError = 1, kEngineError = 2 };

class UsageError : public Error {
public:
    using Error::Error;
};

namespace fs = std::filesystem;

/// Writes next to the target, then renames, so a failed run leaves no
/// partial file behind.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp-" + std::to_string(std::random_device{}());
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw UsageError("cannot write " + path.string());
        f << content;
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw UsageError("cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw UsageError("cannot write " + path.string() + ": " + ec.message());
    }
}

inline void emit_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") out << content;
    else write_file_atomic(path, content);
}

/// A netlist path, or the name of a built-in cell when no such file exists.
// Accepts the netlist number syntax (1n, 2.5u, 1meg) for numeric flags.
inline CLI::Validator si_number() {
    return CLI::Validator(
        [](std::string& s) -> std::string {
            auto v = parse_number(s);
            if (!v) return "not a number: " + s;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", *v);
            s = buf;
            return {};
        },
        "NUMBER");
}

inline CellSpec load_cell(const std::string& arg, const CellOptions& opt = {}) {
    if (fs::exists(arg)) {
        auto parsed = parse_netlist_with_diagnostics(read_text_file(arg));
        return cell_from_circuit(fs::path(arg).stem().string(), std::move(parsed.circuit));
    }
    if (auto c = make_cell(arg, opt)) return *c;
    throw FileNotFound(arg);
}

inline ModelSet models_for(double vtn, double vtp) {
    ModelSet m;
    m.nmos.vt0 = vtn;
    m.pmos.vt0 = -vtp;
    return m;
}

inline std::string bit_text(const OutputObservation& o) {
    if (o.state.logic == Logic::HiZ) return "Z";
    if (o.state.logic == Logic::Conflict) return "X";
    return (o.bit && *o.bit) ? "1" : "0";
}

inline std::string check_report(const CellSpec& cell, const SwitchParams& p, ReportFormat fmt) {
    const TruthTableResult tt = truth_table(cell, p);
    const Operability op = operability(cell, p);
    if (fmt == ReportFormat::Json) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : tt.rows) {
            nlohmann::ordered_json outs;
            for (const auto& [name, o] : r.outputs) {
                auto level = o.state.level();
                outs[name] = {{"logic", std::string(to_string(o.state.logic))},
                              {"level", level ? nlohmann::ordered_json(*level) : nlohmann::ordered_json()},
                              {"strength", o.state.strength == Strength::Driven ? "driven" : "passed"},
                              {"weak_one", o.weak_one},
                              {"weak_zero", o.weak_zero}};
            }
            std::vector<int> in;
            for (bool b : r.inputs) in.push_back(b);
            rows.push_back({{"row", r.row}, {"inputs", in}, {"valid", r.valid}, {"outputs", outs}});
        }
        nlohmann::ordered_json j{{"cell", cell.name},
                                 {"vdd", p.vdd},
                                 {"vtn", p.vtn},
                                 {"vtp", p.vtp_abs},
                                 {"inputs", tt.inputs},
                                 {"outputs", tt.outputs},
                                 {"rows", rows},
                                 {"warnings", tt.warnings},
                                 {"operable", op.operable},
                                 {"reason", op.reason}};
        return j.dump(2) + "\n";
    }

    std::ostringstream os;
    os << "# " << cell.name << " at Vdd " << format_sig(p.vdd, 2, 1) << " V (Vtn " << format_sig(p.vtn, 2, 1)
       << " V, |Vtp| " << format_sig(p.vtp_abs, 2, 1) << " V)\n\n|";
    for (const auto& i : tt.inputs) os << ' ' << i << " |";
    for (const auto& o : tt.outputs) os << ' ' << o << " | " << o << " level |";
    os << "\n|";
    for (std::size_t i = 0; i < tt.inputs.size() + 2 * tt.outputs.size(); ++i) os << "---|";
    os << '\n';
    for (const auto& r : tt.rows) {
        os << '|';
        for (bool b : r.inputs) os << ' ' << b << " |";
        for (const auto& o : tt.outputs) {
            const auto& obs = r.outputs.at(o);
            auto level = obs.state.level();
            os << ' ' << bit_text(obs) << " | "
               << (level ? format_sig(*level, 3, 2) + " V " +
                               (obs.state.strength == Strength::Driven ? "driven" : "passed")
                         : std::string("-"))
               << " |";
        }
        os << '\n';
    }
    os << "\n## Degradation\n\n";
    bool any = false;
    for (const auto& r : tt.rows) {
        for (const auto& [name, o] : r.outputs) {
            if (o.weak_one) os << "- row " << r.row << ": " << name << " One at " << format_sig(o.state.vmax, 3, 2) << " V\n";
            if (o.weak_zero)
                os << "- row " << r.row << ": " << name << " Zero at " << format_sig(o.state.vmin, 3, 2) << " V\n";
            any = any || o.weak_one || o.weak_zero;
        }
        for (const auto& issue : r.issues) {
            os << "- row " << r.row << ": " << issue << '\n';
            any = true;
        }
    }
    if (!any) os << "All outputs full swing.\n";
    if (!tt.warnings.empty()) {
        os << "\n## Warnings\n\n";
        for (const auto& w : tt.warnings) os << "- " << w << '\n';
    }
    os << "\n## Operability\n\n" << (op.operable ? "operable" : "inoperable") << " (" << op.reason << ")\n";
    return os.str();
}

inline std::string history_csv(const SizingResult& res) {
    std::ostringstream os;
    os << "eval,objective,candidate,note";
    std::vector<std::string> names;
    for (const auto& [n, w] : res.widths) names.push_back(n);
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (std::size_t i = 0; i < res.history.size(); ++i) {
        const auto& h = res.history[i];
        char buf[64];
        os << i;
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g", h.objective, h.candidate);
        os << buf << ',' << detail::csv_field(h.note);
        for (const auto& n : names) os << ',' << format_number(h.widths.at(n));
        os << '\n';
    }
    return os.str();
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"cellforge: build, verify and measure GDI/PTL full-adder cells"};
    app.set_version_flag("--version", std::string("cellforge ") + CELLFORGE_VERSION);
    app.require_subcommand(1);
    std::function<int()> action;

    // emit
    std::string emit_cell;
    bool emit_tb = false;
    double emit_vdd = 1.8;
    std::uint64_t seed = 1;
    std::string emit_out;
    auto* emit = app.add_subcommand("emit", "Print a built-in cell (or `random`) as a netlist");
    emit->add_option("cell", emit_cell, "Cell name: " + [] {
        std::string s;
        for (const auto& n : builtin_cell_names()) s += (s.empty() ? "" : ", ") + n;
        return s + ", random";
    }())->required();
    emit->add_flag("--testbench", emit_tb, "Add supply, input stimulus and output loads");
    emit->add_option("--vdd", emit_vdd, "Supply for --testbench")->transform(si_number())->check(CLI::PositiveNumber);
    emit->add_option("--seed", seed, "Seed for `random`");
    emit->add_option("-o,--output", emit_out, "Output file (default: standard output)");
    emit->callback([&] {
        action = [&] {
            if (emit_cell == "random") {
                std::mt19937_64 rng(seed);
                emit_output(emit_out, serialize(random_circuit(rng), "random circuit, seed " + std::to_string(seed)),
                            out);
                return int(kOk);
            }
            auto cell = make_cell(emit_cell);
            if (!cell) throw UsageError("unknown cell '" + emit_cell + "'");
            Circuit c = cell->circuit;
            std::string title = cell->name;
            if (emit_tb) {
                c = make_testbench(c, emit_vdd, ModelSet{}.load);
                title += " testbench, Vdd " + format_number(emit_vdd);
            }
            emit_output(emit_out, serialize(c, title), out);
            return int(kOk);
        };
    });

    // check / truthtable
    std::string check_in, check_fmt = "md", check_out;
    double vdd = 1.8, vtn = 0.5, vtp = 0.5;
    auto* check = app.add_subcommand("check", "Switch-level truth table, degradation report and operability");
    check->add_option("netlist", check_in, "Netlist file or built-in cell name")->required();
    check->add_option("--vdd", vdd, "Supply voltage")->transform(si_number())->check(CLI::PositiveNumber);
    check->add_option("--vtn", vtn, "NMOS threshold")->transform(si_number())->check(CLI::PositiveNumber);
    check->add_option("--vtp", vtp, "PMOS threshold magnitude")->transform(si_number())->check(CLI::PositiveNumber);
    check->add_option("--format", check_fmt, "md or json")->check(CLI::IsMember({"md", "json"}));
    check->add_option("-o,--output", check_out, "Output file");
    check->callback([&] {
        action = [&] {
            auto cell = load_cell(check_in);
            if (cell.circuit.ports().empty()) throw UsageError("netlist has no .ports line");
            emit_output(check_out, check_report(cell, {vdd, vtn, vtp}, *parse_format(check_fmt)), out);
            return int(kOk);
        };
    });

    std::string tt_in;
    bool tt_transient = false;
    auto* tt = app.add_subcommand("truthtable", "Print the truth table of a cell");
    tt->add_option("netlist", tt_in, "Netlist file or built-in cell name")->required();
    tt->add_option("--vdd", vdd, "Supply voltage")->transform(si_number())->check(CLI::PositiveNumber);
    tt->add_option("--vtn", vtn, "NMOS threshold")->transform(si_number())->check(CLI::PositiveNumber);
    tt->add_option("--vtp", vtp, "PMOS threshold magnitude")->transform(si_number())->check(CLI::PositiveNumber);
    tt->add_flag("--transient", tt_transient, "Digitize a transient run instead of switch-level evaluation");
    tt->callback([&] {
        action = [&] {
            auto cell = load_cell(tt_in);
            const Ports& ports = cell.circuit.ports();
            if (ports.empty()) throw UsageError("netlist has no .ports line");
            std::map<std::string, TruthFunction> fns;
            if (tt_transient) {
                ModelSet m = models_for(vtn, vtp);
                Stimulus st;
                SimOptions o;
                o.tstop = st.tstop(ports.inputs.size());
                auto w = transient(make_testbench(cell.circuit, vdd, m.load, st), m, o);
                fns = transient_truth_table(w, ports, vdd, st);
            } else {
                fns = truth_table(cell, {vdd, vtn, vtp}).functions;
            }
            for (const auto& i : ports.inputs) out << i << ' ';
            out << '|';
            for (const auto& o : ports.outputs) out << ' ' << o;
            out << '\n';
            const int n = static_cast<int>(ports.inputs.size());
            for (std::size_t row = 0; row < (std::size_t{1} << n); ++row) {
                for (bool b : TruthFunction::row_bits(n, row)) out << b << ' ';
                out << '|';
                for (const auto& o : ports.outputs) out << ' ' << fns.at(o)(row);
                out << '\n';
            }
            return int(kOk);
        };
    });

    // sim
    std::string sim_in, sim_out;
    double sim_tstop = 0, sim_tstep = SimOptions{}.tstep;
    std::vector<std::string> sim_nets;
    auto* sim = app.add_subcommand("sim", "Transient simulation; writes CSV or VCD");
    sim->add_option("netlist", sim_in, "Netlist file or built-in cell name")->required();
    sim->add_option("--vdd", vdd, "Supply for the generated testbench")->transform(si_number())->check(CLI::PositiveNumber);
    sim->add_option("--tstop", sim_tstop, "Stop time (default: two stimulus laps)")->transform(si_number());
    sim->add_option("--tstep", sim_tstep, "Time step")->transform(si_number())->check(CLI::PositiveNumber);
    sim->add_option("--vtn", vtn, "NMOS threshold")->transform(si_number())->check(CLI::PositiveNumber);
    sim->add_option("--vtp", vtp, "PMOS threshold magnitude")->transform(si_number())->check(CLI::PositiveNumber);
    sim->add_option("--nets", sim_nets, "Nets to export (default: all)")->delimiter(',');
    sim->add_option("-o,--output", sim_out, "wave.csv or wave.vcd (default: CSV on standard output)");
    sim->callback([&] {
        action = [&] {
            auto cell = load_cell(sim_in);
            ModelSet m = models_for(vtn, vtp);
            Circuit c = cell.circuit;
            Stimulus st;
            double tstop = sim_tstop;
            // A bare cell gets the standard testbench.
            if (c.sources().empty()) {
                if (c.ports().empty()) throw UsageError("netlist has neither sources nor a .ports line");
                c = make_testbench(c, vdd, m.load, st);
                if (tstop <= 0) tstop = st.tstop(cell.circuit.ports().inputs.size());
            }
            if (tstop <= 0) throw UsageError("--tstop is required for netlists with their own sources");
            SimOptions o;
            o.tstep = sim_tstep;
            o.tstop = tstop;
            if (!(o.tstop > o.tstep)) throw UsageError("--tstop must exceed --tstep");
            auto w = transient(c, m, o);
            std::ostringstream os;
            if (fs::path(sim_out).extension() == ".vcd") write_vcd(os, w, vdd, sim_nets, sim_nets);
            else write_csv(os, w, sim_nets);
            emit_output(sim_out, os.str(), out);
            return int(kOk);
        };
    });

    // bench
    std::string bench_cfg, bench_out, bench_fmt = "md";
    bool strict = false;
    int jobs = -1;
    auto* bench = app.add_subcommand("bench", "Sweep cells over supply voltages and report delay, power, PDP");
    bench->add_option("--config", bench_cfg, "Suite file (default: built-in suite)");
    bench->add_option("-o,--output", bench_out, "Report file (default: standard output)");
    bench->add_option("--format", bench_fmt, "md, csv or json")->check(CLI::IsMember({"md", "csv", "json"}));
    bench->add_flag("--strict", strict, "Exit 1 when a trend check fails");
    bench->add_option("--jobs", jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    bench->callback([&] {
        action = [&] {
            SuiteConfig cfg;
            fs::path base = ".";
            if (!bench_cfg.empty()) {
                cfg = parse_suite_config(read_text_file(bench_cfg));
                base = fs::path(bench_cfg).parent_path();
            }
            if (jobs >= 0) cfg.options.jobs = static_cast<unsigned>(jobs);
            const auto fmt = *parse_format(bench_fmt);
            auto reports = run_suite(load_cells(cfg, base), cfg.vdds, cfg.models, cfg.options);
            auto trends = trend_check(reports);
            std::string text = render(reports, fmt);
            if (fmt == ReportFormat::Markdown) text += render_trends(trends, fmt);
            emit_output(bench_out, text, out);
            bool all_pass = true;
            for (const auto& t : trends) {
                if (!t.passed) err << "trend check failed: " << t.claim << " (" << t.detail << ")\n";
                all_pass = all_pass && t.passed;
            }
            return int(strict && !all_pass ? kUserError : kOk);
        };
    });

    // size
    std::string size_in, size_out, size_hist, size_obj = "pdp";
    int budget = 200;
    bool pair = false;
    double w_min = kMinFeatureWidth, w_max = 20e-6;
    std::vector<std::string> tunable;
    auto* size = app.add_subcommand("size", "Optimise transistor widths by coordinate descent");
    size->add_option("netlist", size_in, "Netlist file or built-in cell name")->required();
    size->add_option("--objective", size_obj, "pdp, delay or power")->check(CLI::IsMember({"pdp", "delay", "power"}));
    size->add_option("--vdd", vdd, "Supply voltage")->transform(si_number())->check(CLI::PositiveNumber);
    size->add_option("--budget", budget, "Simulation budget")->check(CLI::PositiveNumber);
    size->add_option("--tunable", tunable, "Transistors to size (default: all)")->delimiter(',');
    size->add_flag("--pair", pair, "Move P/N devices sharing gate and drain together");
    size->add_option("--wmin", w_min, "Minimum width")->transform(si_number());
    size->add_option("--wmax", w_max, "Maximum width")->transform(si_number());
    size->add_option("--vtn", vtn, "NMOS threshold")->transform(si_number())->check(CLI::PositiveNumber);
    size->add_option("--vtp", vtp, "PMOS threshold magnitude")->transform(si_number())->check(CLI::PositiveNumber);
    size->add_option("--jobs", jobs, "Parallel candidate evaluations (0: all cores)")->check(CLI::NonNegativeNumber);
    size->add_option("-o,--output", size_out, "Sized netlist (default: standard output)");
    size->add_option("--history", size_hist, "CSV history file");
    size->callback([&] {
        action = [&] {
            auto cell = load_cell(size_in);
            if (cell.circuit.ports().empty()) throw UsageError("netlist has no .ports line");
            SizingProblem p;
            p.tunable = tunable.empty() ? all_devices(cell.circuit) : tunable;
            for (const auto& t : p.tunable)
                if (!cell.circuit.find_mosfet(t)) throw UsageError("no transistor named '" + t + "'");
            if (pair) p.ganged = pn_pairs(cell.circuit, p.tunable);
            p.w_min = w_min;
            p.w_max = w_max;
            if (p.w_min < kMinFeatureWidth || !(p.w_min < p.w_max))
                throw UsageError("need 2u <= --wmin < --wmax");
            p.vdd = vdd;
            p.objective = *parse_objective(size_obj);
            p.cell = cell;
            BenchOptions bo;
            bo.jobs = jobs < 0 ? 1U : static_cast<unsigned>(jobs);
            auto res = optimize(p, models_for(vtn, vtp), bo, budget);
            Circuit sized = cell.circuit;
            for (const auto& [n, w] : res.widths) sized.set_width(n, w);
            if (!size_hist.empty()) write_file_atomic(size_hist, history_csv(res));
            emit_output(size_out, serialize(sized, cell.name + " sized for " + std::string(to_string(p.objective))),
                        out);
            err << to_string(p.objective) << ": " << res.initial_objective << " -> " << res.objective << " after "
                << res.evaluations << " evaluations\n";
            return int(kOk);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUserError;
    }
    try {
        return action ? action() : int(kUserError);
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << '\n';
        return kEngineError;
    } catch (const SingularMatrix& e) {
        err << "error: " << e.what() << '\n';
        return kEngineError;
    } catch (const InfeasibleStart& e) {
        err << "error: " << e.what() << '\n';
        return kEngineError;
    } catch (const NoTransition& e) {
        err << "error: " << e.what() << '\n';
        return kEngineError;
    } catch (const Error& e) {
        // Parse errors, bad circuits, missing files and bad flag values.
        err << "error: " << e.what() << '\n';
        return kUserError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kEngineError;
    }
}

}  // namespace cellforge::cli
