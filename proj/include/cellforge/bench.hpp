#pragma once

// Cell x Vdd sweep: switch-level verdicts plus transient delay, power and PDP,
// rendered as count / delay / power / PDP tables.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cellforge/cells.hpp"
#include "cellforge/device.hpp"
#include "cellforge/error.hpp"
#include "cellforge/measure.hpp"
#include "cellforge/netlist.hpp"
#include "cellforge/switchlevel.hpp"
#include "cellforge/transient.hpp"
#include "cellforge/units.hpp"

namespace cellforge {

struct BenchOptions {
    SimOptions sim;  // tstop is derived from the stimulus
    Stimulus stimulus;
    unsigned jobs = 1;  // 0: one per hardware thread
};

struct MeasurementReport {
    std::string cell;
    double vdd = 0.0;
    TransistorCount counts;
    bool operable = false;
    std::optional<double> delay;  // empty: distorted
    std::optional<double> power;
    std::optional<double> pdp;
    std::vector<std::string> notes;

    bool distorted() const { return !delay.has_value(); }
};

inline SwitchParams switch_params(const ModelSet& m, double vdd) { return {vdd, m.vtn(), m.vtp_abs()}; }

/// Worst-case delay over every (input, output) pair that responds inside half
/// a period of an input edge, on the measured lap.
inline double cell_delay(const Waveform& w, const Ports& ports, const std::vector<std::string>& outputs, double vdd,
                         const Stimulus& stim) {
    const std::size_t n = ports.inputs.size();
    const DelayWindow win{stim.measure_from(n), stim.tstop(n), stim.period / 2};
    double worst = -1;
    for (const auto& in : ports.inputs)
        for (const auto& out : outputs) {
            try {
                worst = std::max(worst, measure_delay(w, in, out, vdd, win));
            } catch (const NoTransition&) {
            }
        }
    if (worst < 0) throw NoTransition("no output responds to any input edge");
    return worst;
}

/// One bench row. Simulation failures end up in notes.
inline MeasurementReport measure_cell(const CellSpec& cell, double vdd, const ModelSet& models,
                                      const BenchOptions& opt = {}) {
    MeasurementReport r;
    r.cell = cell.name;
    r.vdd = vdd;
    r.counts = count_transistors(cell.circuit);
    const Ports& ports = cell.circuit.ports();
    try {
        auto op = operability(cell, switch_params(models, vdd));
        r.operable = op.operable;
        if (!op.operable) r.notes.push_back("inoperable: " + op.reason);
    } catch (const Error& e) {
        r.notes.push_back(std::string("switch-level check failed: ") + e.what());
    }

    try {
        const Circuit tb = make_testbench(cell.circuit, vdd, models.load, opt.stimulus);
        SimOptions sim = opt.sim;
        sim.tstop = opt.stimulus.tstop(ports.inputs.size());
        const Waveform w = transient(tb, models, sim);
        const std::size_t n = ports.inputs.size();
        r.power = measure_power(w, vdd, opt.stimulus.measure_from(n), opt.stimulus.tstop(n));

        std::vector<std::string> outputs;
        for (const auto& [o, fn] : cell.golden) outputs.push_back(o);
        if (outputs.empty()) outputs = ports.outputs;

        bool logic_ok = true;
        if (!cell.golden.empty()) {
            const auto tt = transient_truth_table(w, ports, vdd, opt.stimulus);
            std::set<std::size_t> bad;
            for (const auto& [o, fn] : cell.golden)
                for (std::size_t row = 0; row < fn.table.size(); ++row)
                    if (tt.at(o)(row) != fn(row)) bad.insert(row);
            if (!bad.empty()) {
                logic_ok = false;
                std::string rows;
                for (auto b : bad) rows += (rows.empty() ? "" : ",") + std::to_string(b);
                r.notes.push_back("distorted: output differs from reference at rows " + rows);
            }
        }
        std::optional<double> raw;
        try {
            raw = cell_delay(w, ports, outputs, vdd, opt.stimulus);
        } catch (const NoTransition& e) {
            logic_ok = false;
            r.notes.push_back(std::string("distorted: ") + e.what());
        }
        if (logic_ok) {
            r.delay = raw;
            r.pdp = pdp(*raw, *r.power);
        } else if (raw) {
            r.notes.push_back("raw delay " + render_delay(*raw) + ", raw PDP " + render_energy(pdp(*raw, *r.power)));
        }
    } catch (const Error& e) {
        r.notes.push_back(std::string("simulation failed: ") + e.what());
    }
    return r;
}

/// One report per (cell, vdd), cell-major in input order.
inline std::vector<MeasurementReport> run_suite(const std::vector<CellSpec>& cells, const std::vector<double>& vdds,
                                                const ModelSet& models, const BenchOptions& opt = {}) {
    if (cells.empty() || vdds.empty()) throw Error("bench needs at least one cell and one supply voltage");
    const std::size_t total = cells.size() * vdds.size();
    std::vector<MeasurementReport> out(total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < total; k = next++) {
            const auto& cell = cells[k / vdds.size()];
            out[k] = measure_cell(cell, vdds[k % vdds.size()], models, opt);
        }
    };
    unsigned jobs = opt.jobs == 0 ? std::max(1U, std::thread::hardware_concurrency()) : opt.jobs;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

enum class ReportFormat { Markdown, Csv, Json };

inline std::optional<ReportFormat> parse_format(std::string_view s) {
    if (s == "md" || s == "markdown") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    return std::nullopt;
}

namespace detail {

inline std::string vdd_label(double v) { return format_sig(v, 2, 1) + " V"; }

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

inline std::string plain(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string si(std::optional<double> v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", *v);
    return buf;
}

template <class F>
void metric_table(std::ostringstream& os, const std::string& title, const std::vector<std::string>& cells,
                  const std::vector<double>& vdds,
                  const std::map<std::pair<std::string, double>, const MeasurementReport*>& at, F&& cell_text) {
    os << "## " << title << "\n\n| Cell |";
    for (double v : vdds) os << ' ' << vdd_label(v) << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < vdds.size(); ++i) os << "---:|";
    os << '\n';
    for (const auto& c : cells) {
        os << "| " << c << " |";
        for (double v : vdds) {
            auto it = at.find({c, v});
            os << ' ' << (it == at.end() ? std::string("-") : cell_text(*it->second)) << " |";
        }
        os << '\n';
    }
    os << '\n';
}

}  // namespace detail

inline std::string render(const std::vector<MeasurementReport>& reports, ReportFormat fmt) {
    std::ostringstream os;
    if (fmt == ReportFormat::Csv) {
        os << "cell,vdd,nmos,pmos,total,operable,distorted,delay_s,power_w,pdp_j,notes\n";
        for (const auto& r : reports) {
            std::string notes;
            for (const auto& n : r.notes) notes += (notes.empty() ? "" : "; ") + n;
            os << detail::csv_field(r.cell) << ',' << detail::plain(r.vdd) << ',' << r.counts.nmos << ','
               << r.counts.pmos << ',' << r.counts.total << ',' << (r.operable ? 1 : 0) << ','
               << (r.distorted() ? 1 : 0) << ',' << detail::si(r.delay) << ',' << detail::si(r.power) << ','
               << detail::si(r.pdp) << ',' << detail::csv_field(notes) << '\n';
        }
        return os.str();
    }
    if (fmt == ReportFormat::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        auto opt = [](std::optional<double> v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
        for (const auto& r : reports) {
            arr.push_back({{"cell", r.cell},
                           {"vdd", r.vdd},
                           {"counts", {{"nmos", r.counts.nmos}, {"pmos", r.counts.pmos}, {"total", r.counts.total}}},
                           {"operable", r.operable},
                           {"distorted", r.distorted()},
                           {"delay_s", opt(r.delay)},
                           {"power_w", opt(r.power)},
                           {"pdp_j", opt(r.pdp)},
                           {"notes", r.notes}});
        }
        return nlohmann::ordered_json{{"reports", arr}}.dump(2) + "\n";
    }

    std::vector<std::string> cells;
    std::vector<double> vdds;
    std::map<std::pair<std::string, double>, const MeasurementReport*> at;
    for (const auto& r : reports) {
        if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);
        if (std::find(vdds.begin(), vdds.end(), r.vdd) == vdds.end()) vdds.push_back(r.vdd);
        at[{r.cell, r.vdd}] = &r;
    }

    os << "## Transistor count\n\n| Cell | NMOS | PMOS | Total |\n|---|---:|---:|---:|\n";
    for (const auto& c : cells) {
        const auto& r = *std::find_if(reports.begin(), reports.end(), [&](const auto& x) { return x.cell == c; });
        os << "| " << c << " | " << r.counts.nmos << " | " << r.counts.pmos << " | " << r.counts.total << " |\n";
    }
    os << '\n';
    detail::metric_table(os, "Delay", cells, vdds, at, [](const MeasurementReport& r) {
        return r.delay ? render_delay(*r.delay) : std::string("distorted");
    });
    detail::metric_table(os, "Power", cells, vdds, at, [](const MeasurementReport& r) {
        return r.power ? render_power(*r.power) : std::string("-");
    });
    detail::metric_table(os, "PDP", cells, vdds, at, [](const MeasurementReport& r) {
        return r.pdp ? render_energy(*r.pdp) : std::string("-");
    });
    detail::metric_table(os, "Operable (Vdd >= 2 Vt and switch-level logic)", cells, vdds, at,
                         [](const MeasurementReport& r) { return std::string(r.operable ? "yes" : "no"); });

    bool any_notes = false;
    for (const auto& r : reports) any_notes = any_notes || !r.notes.empty();
    if (any_notes) {
        os << "## Notes\n\n";
        for (const auto& r : reports)
            for (const auto& n : r.notes) os << "- " << r.cell << " @ " << detail::vdd_label(r.vdd) << ": " << n << '\n';
        os << '\n';
    }
    return os.str();
}

struct TrendResult {
    std::string claim;
    bool passed = false;
    std::string detail;
};

/// Qualitative checks against the published trends. Needs at least two
/// distinct supply voltages; otherwise returns nothing.
inline std::vector<TrendResult> trend_check(const std::vector<MeasurementReport>& reports) {
    std::set<double> all_vdds;
    for (const auto& r : reports) all_vdds.insert(r.vdd);
    std::vector<TrendResult> out;
    if (all_vdds.size() < 2) return out;

    std::vector<std::string> cells;
    for (const auto& r : reports)
        if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);

    for (const auto& c : cells) {
        std::vector<const MeasurementReport*> rows;
        for (const auto& r : reports)
            if (r.cell == c) rows.push_back(&r);
        std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->vdd > b->vdd; });
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            const auto& hi = *rows[i];
            const auto& lo = *rows[i + 1];
            const std::string span = detail::vdd_label(hi.vdd) + " -> " + detail::vdd_label(lo.vdd);
            if (hi.delay && lo.delay) {
                out.push_back({c + ": delay rises as Vdd drops " + span, *lo.delay > *hi.delay,
                               render_delay(*hi.delay) + " -> " + render_delay(*lo.delay)});
            }
            if (hi.power && lo.power) {
                out.push_back({c + ": power falls as Vdd drops " + span, *lo.power < *hi.power,
                               render_power(*hi.power) + " -> " + render_power(*lo.power)});
            }
        }
    }

    // Transistor count rather than name picks out the 10T cells and the 28T
    // reference, so external netlists take part too.
    for (double v : all_vdds) {
        const MeasurementReport* ref = nullptr;
        for (const auto& r : reports)
            if (r.vdd == v && r.counts.total == 28 && r.delay) ref = &r;
        if (!ref) continue;
        for (const auto& r : reports) {
            if (r.vdd != v || r.counts.total != 10 || !r.delay) continue;
            out.push_back({r.cell + " not slower than " + ref->cell + " at " + detail::vdd_label(v),
                           *r.delay <= *ref->delay, render_delay(*r.delay) + " vs " + render_delay(*ref->delay)});
        }
    }
    return out;
}

inline std::string render_trends(const std::vector<TrendResult>& trends, ReportFormat fmt) {
    std::ostringstream os;
    if (fmt == ReportFormat::Json) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& t : trends) arr.push_back({{"claim", t.claim}, {"passed", t.passed}, {"detail", t.detail}});
        return nlohmann::ordered_json{{"trends", arr}}.dump(2) + "\n";
    }
    if (fmt == ReportFormat::Csv) {
        os << "claim,passed,detail\n";
        for (const auto& t : trends)
            os << detail::csv_field(t.claim) << ',' << (t.passed ? 1 : 0) << ',' << detail::csv_field(t.detail) << '\n';
        return os.str();
    }
    os << "## Trend checks\n\n";
    if (trends.empty()) os << "Not enough supply voltages to check trends.\n";
    for (const auto& t : trends) os << "- [" << (t.passed ? "pass" : "FAIL") << "] " << t.claim << " (" << t.detail << ")\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Suite configuration: `key = value` lines, optional [nmos] / [pmos] sections.

struct SuiteConfig {
    std::vector<std::string> cells{"proposed-gdi", "proposed-ptl-gdi", "cmos28"};
    std::vector<double> vdds{3.0, 1.8, 0.8};
    ModelSet models;
    BenchOptions options;
    CellOptions cell_options;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

inline std::vector<std::string> config_list(const std::string& v, std::size_t line) {
    std::string body = v;
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw ParseError("unterminated list", line, 1);
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> items;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
        items.push_back(item);
    }
    return items;
}

inline double config_number(const std::string& v, std::size_t line) {
    auto x = parse_number(v);
    if (!x) throw ParseError("expected a number, got '" + v + "'", line, 1);
    return *x;
}

}  // namespace detail

inline SuiteConfig parse_suite_config(std::string_view text) {
    SuiteConfig cfg;
    std::string section;
    std::size_t lineno = 0;
    std::stringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']') throw ParseError("bad section header", lineno, 1);
            section = detail::lower(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "nmos" && section != "pmos") throw ParseError("unknown section [" + section + "]", lineno, 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno, 1);
        const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
        std::string value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        auto num = [&] { return detail::config_number(value, lineno); };

        if (!section.empty()) {
            DeviceModel& m = section == "nmos" ? cfg.models.nmos : cfg.models.pmos;
            if (key == "vt0") m.vt0 = num();
            else if (key == "kprime") m.kprime = num();
            else if (key == "lambda") m.lambda = num();
            else if (key == "cox_area") m.cox_area = num();
            else if (key == "cj_term") m.cj_term = num();
            else throw ParseError("unknown model key '" + key + "'", lineno, 1);
            continue;
        }
        if (key == "cells") cfg.cells = detail::config_list(value, lineno);
        else if (key == "vdds" || key == "vdd") {
            cfg.vdds.clear();
            for (const auto& s : detail::config_list(value, lineno)) cfg.vdds.push_back(detail::config_number(s, lineno));
        } else if (key == "tstep") cfg.options.sim.tstep = num();
        else if (key == "period") cfg.options.stimulus.period = num();
        else if (key == "edge") cfg.options.stimulus.edge = num();
        else if (key == "laps") cfg.options.stimulus.laps = static_cast<int>(num());
        else if (key == "load") cfg.models.load = num();
        else if (key == "jobs") cfg.options.jobs = static_cast<unsigned>(num());
        else if (key == "gmin") cfg.options.sim.gmin = num();
        else if (key == "wp") cfg.cell_options.wp = num();
        else if (key == "wn") cfg.cell_options.wn = num();
        else if (key == "length") cfg.cell_options.length = num();
        else throw ParseError("unknown key '" + key + "'", lineno, 1);
    }
    if (cfg.cells.empty()) throw ParseError("no cells listed", 0, 0);
    if (cfg.vdds.empty()) throw ParseError("no supply voltages listed", 0, 0);
    if (cfg.options.stimulus.laps < 2) throw ParseError("laps must be at least 2 (one warm-up lap)", 0, 0);
    if (!(cfg.options.stimulus.edge > 0) || !(cfg.options.stimulus.period > 4 * cfg.options.stimulus.edge))
        throw ParseError("need 0 < edge < period/4", 0, 0);
    if (!(cfg.models.nmos.kprime > 0) || !(cfg.models.pmos.kprime > 0) || cfg.models.nmos.lambda < 0 ||
        cfg.models.pmos.lambda < 0 || cfg.models.nmos.cox_area < 0 || cfg.models.pmos.cox_area < 0)
        throw ParseError("model parameters out of range", 0, 0);
    return cfg;
}

inline std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw FileNotFound(p.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

/// Built-in generator names, or netlist paths relative to `base`.
inline std::vector<CellSpec> load_cells(const SuiteConfig& cfg, const std::filesystem::path& base = ".") {
    std::vector<CellSpec> cells;
    for (const auto& name : cfg.cells) {
        if (auto c = make_cell(name, cfg.cell_options)) {
            cells.push_back(std::move(*c));
            continue;
        }
        std::filesystem::path p(name);
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p)) throw Error("unknown cell or missing netlist: " + name);
        cells.push_back(cell_from_circuit(p.stem().string(), parse_netlist(read_text_file(p))));
    }
    return cells;
}

}  // namespace cellforge
