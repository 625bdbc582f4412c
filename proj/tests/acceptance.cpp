// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "cellforge/cellforge.hpp"
#include "fixtures.hpp"

using namespace cellforge;

namespace {

struct Verdict {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

int failures = 0;

void criterion(const char* name, double limit_s, const std::function<Verdict()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > limit_s) v.require(false, "took " + std::to_string(dt) + " s, limit " + std::to_string(limit_s) + " s");
    std::printf("%s %s (%.2f s)%s%s\n", v.ok ? "PASS" : "FAIL", name, dt, v.detail.empty() ? "" : ": ",
                v.detail.c_str());
    std::fflush(stdout);
    failures += !v.ok;
}

std::string fmt(const char* f, double a, double b = 0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

// k NMOS source followers, each gated by the previous stage's output.
Circuit gate_cascade(int k) {
    Circuit c;
    std::string gate = "g";
    for (int i = 1; i <= k; ++i) {
        std::string out = "y" + std::to_string(i);
        c.add(Mosfet{"M" + std::to_string(i), Polarity::NMOS, "vdd", gate, out, "0", 2e-6, 0.18e-6});
        gate = out;
    }
    c.set_ports(Ports{{"g"}, {gate}, "vdd"});
    return c;
}

std::vector<CellSpec> suite_cells() { return {proposed_gdi_adder(), proposed_ptl_gdi_adder(), cmos28_reference_adder()}; }

Verdict table2_counts() {
    Verdict v;
    for (const auto& cell : {proposed_gdi_adder(), proposed_ptl_gdi_adder()}) {
        const auto n = count_transistors(cell.circuit);
        v.require(n.total == 10 && n.nmos == 5 && n.pmos == 5,
                  cell.name + " has " + std::to_string(n.nmos) + "N/" + std::to_string(n.pmos) + "P");
    }
    v.detail = v.ok ? "both proposed adders: 5 NMOS + 5 PMOS = 10" : v.detail;
    return v;
}

Verdict table1_rows() {
    Verdict v;
    struct Expect {
        std::string_view fn;
        bool (*f)(bool, bool, bool);
    };
    const Expect expect[] = {
        {"F1", [](bool a, bool b, bool) { return !a && b; }},
        {"F2", [](bool a, bool b, bool) { return !a || b; }},
        {"OR", [](bool a, bool b, bool) { return a || b; }},
        {"AND", [](bool a, bool b, bool) { return a && b; }},
        {"MUX", [](bool a, bool b, bool c) { return (!a && b) || (a && c); }},
    };
    const auto& table = gdi_function_table();
    v.require(table.size() == 5, "function table has " + std::to_string(table.size()) + " rows");
    int rows = 0;
    for (std::size_t i = 0; i < table.size() && i < 5; ++i) {
        v.require(table[i].function == expect[i].fn, "row order");
        auto cell = gdi_cell(table[i].config);
        for (double vdd : {1.8, 3.0}) {
            auto t = truth_table(cell, SwitchParams{vdd, 0.5, 0.5});
            const auto& inputs = t.inputs;
            for (const auto& r : t.rows) {
                bool in[3] = {false, false, false};
                for (std::size_t k = 0; k < inputs.size(); ++k) in[inputs[k][0] - 'a'] = r.inputs[k];
                const auto& o = r.outputs.at("out");
                v.require(r.valid && o.bit && *o.bit == expect[i].f(in[0], in[1], in[2]),
                          std::string(expect[i].fn) + " row " + std::to_string(r.row) + " at " + fmt("%.1f V", vdd));
                ++rows;
            }
        }
    }
    if (v.ok) v.detail = "F1, F2, OR, AND, MUX over " + std::to_string(rows) + " rows at 1.8 V and 3.0 V";
    return v;
}

Verdict golden_equivalence() {
    Verdict v;
    Stimulus st;
    ModelSet m;
    for (const auto& cell : {proposed_gdi_adder(), proposed_ptl_gdi_adder()}) {
        for (double vdd : {1.8, 3.0}) {
            const std::string at = cell.name + " at " + fmt("%.1f V", vdd);
            auto sw = truth_table(cell, SwitchParams{vdd, m.vtn(), m.vtp_abs()});
            v.require(sw.all_valid() && sw.mismatches(cell.golden).empty(), "switch-level mismatch: " + at);
            auto tb = make_testbench(cell.circuit, vdd, m.load, st);
            SimOptions o;
            o.tstop = st.tstop(3);
            auto w = transient(tb, m, o);
            auto tt = transient_truth_table(w, cell.circuit.ports(), vdd, st);
            for (const auto& [port, fn] : cell.golden)
                v.require(tt.at(port) == fn, "transient mismatch on " + port + ": " + at);
        }
    }
    if (v.ok) v.detail = "switch-level and transient tables equal the golden adder, 8 rows x 2 outputs x 4 runs";
    return v;
}

Verdict equation_identity() {
    Verdict v;
    for (int row = 0; row < 8; ++row) {
        const bool a = row & 4, b = row & 2, c = row & 1;
        const bool h = a != b;
        const bool carry = (!h && a) || (h && c);
        const bool sum = h != c;
        v.require(carry == ((a && b) || (a && c) || (b && c)), "carry row " + std::to_string(row));
        v.require(sum == (((a + b + c) & 1) == 1), "sum row " + std::to_string(row));
        const auto g = golden_full_adder(a, b, c);
        v.require(g.sum == sum && g.carry == carry, "golden row " + std::to_string(row));
    }
    if (v.ok) v.detail = "CARRY = majority, SUM = parity on all 8 rows";
    return v;
}

Verdict threshold_drop() {
    Verdict v;
    const SwitchParams p{3.0, 0.5, 0.5};
    auto single = gate_cascade(1);
    std::string levels;
    for (int k = 1; k <= 3; ++k) {
        auto c = gate_cascade(k);
        auto ev = evaluate(c, {{"g", true}}, p);
        const auto& out = ev.at(c.ports().outputs[0]);
        v.require(out.logic == Logic::One, "stage " + std::to_string(k) + " is not One");
        v.require(detail::to_uv(out.vmax) == detail::to_uv(p.vdd - k * p.vtn),
                  "stage " + std::to_string(k) + fmt(" level %.6f V", out.vmax));
        levels += (levels.empty() ? "" : ", ") + fmt("%.2f", out.vmax);
    }
    // Single pass at 1.8 V as well.
    auto ev = evaluate(single, {{"g", true}}, SwitchParams{1.8, 0.5, 0.5});
    v.require(detail::to_uv(ev.at("y1").vmax) == detail::to_uv(1.3), "single pass at 1.8 V");
    if (v.ok) v.detail = "Vdd 3.0 V, Vtn 0.5 V: k = 1..3 gives " + levels + " V";
    return v;
}

Verdict operability_rule() {
    Verdict v;
    ModelSet m;
    std::vector<CellSpec> pass_cells{proposed_gdi_adder(), proposed_ptl_gdi_adder(), ptl_xor2()};
    for (const auto& row : gdi_function_table()) pass_cells.push_back(gdi_cell(row.config));
    for (const auto& cell : pass_cells)
        v.require(!operability(cell, SwitchParams{0.8, m.vtn(), m.vtp_abs()}).operable, cell.name + " operable at 0.8 V");
    for (const auto& cell : suite_cells()) {
        auto op = operability(cell, SwitchParams{1.8, m.vtn(), m.vtp_abs()});
        v.require(op.operable, cell.name + " inoperable at 1.8 V: " + op.reason);
    }
    if (v.ok)
        v.detail = std::to_string(pass_cells.size()) + " pass-transistor cells inoperable at 0.8 V, suite cells operable at 1.8 V";
    return v;
}

Verdict solver_oracles() {
    Verdict v;
    std::ostringstream d;

    // RC step response.
    {
        ModelSet m = fixtures::capless_models();
        auto f = fixtures::rc_lowpass(m);
        SimOptions o;
        o.tstop = f.step_at + 10 * f.r * f.c;
        auto w = transient(f.circuit, m, o);
        const double t50 = crossings(w, "out", f.amplitude / 2).at(0) - (f.step_at + 0.5e-12);
        const double ratio = t50 / (std::log(2.0) * f.r * f.c);
        v.require(std::abs(ratio - 1) <= 0.02, fmt("RC t50 / 0.693RC = %.4f", ratio));
        d << fmt("RC %.4f", ratio);
    }

    // Device Jacobians: 100 points per region and polarity.
    {
        ModelSet ms;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double w = 2e-6, l = 0.18e-6, h = 1e-7;
        double worst = 0;
        for (const auto& model : {ms.nmos, ms.pmos}) {
            const double vt = std::abs(model.vt0);
            const double sign = model.is_pmos() ? -1.0 : 1.0;
            for (int region = 0; region < 3; ++region)
                for (int i = 0; i < 100; ++i) {
                    const double vov = 0.05 + u(rng) * 2.5;
                    double vgs = 0, vds = 0;
                    if (region == 0) vgs = vt - 0.01 - u(rng) * 2.0, vds = u(rng) * 3.0;
                    if (region == 1) vgs = vt + vov, vds = 0.01 + u(rng) * (vov - 0.02);
                    if (region == 2) vgs = vt + vov, vds = vov + 0.01 + u(rng) * 2.0;
                    if (i % 2) vgs -= vds, vds = -vds;  // reversed channel
                    vgs *= sign;
                    vds *= sign;
                    const auto e = device_eval(model, w, l, vgs, vds);
                    const double gm =
                        (device_current(model, w, l, vgs + h, vds) - device_current(model, w, l, vgs - h, vds)) / (2 * h);
                    const double gds =
                        (device_current(model, w, l, vgs, vds + h) - device_current(model, w, l, vgs, vds - h)) / (2 * h);
                    for (auto [a, n] : {std::pair{e.gm, gm}, std::pair{e.gds, gds}}) {
                        const double scale = std::max(std::abs(a), std::abs(n));
                        const double err = std::abs(a - n);
                        v.require(err <= 1e-6 * scale + 1e-15, fmt("Jacobian mismatch at vgs %.4f vds %.4f", vgs, vds));
                        if (scale > 0) worst = std::max(worst, err / scale);
                    }
                }
        }
        d << fmt(", Jacobian worst rel %.1e", worst);
    }

    // Inverter VTC.
    {
        double prev = 1e9;
        for (int k = 0; k <= 36; ++k) {
            const double out = dc_operating_point(fixtures::inverter_dc(1.8, 0.05 * k), ModelSet{}).at("out");
            v.require(out <= prev + 1e-9, fmt("VTC rises at vin %.2f", 0.05 * k));
            prev = out;
        }
        d << ", VTC monotone";
    }

    // Dynamic power of a toggling inverter.
    {
        const double vdd = 1.8, period = 10e-9, load = 10e-15;
        ModelSet m;
        SimOptions o;
        o.tstop = 3 * period;
        auto w = transient(fixtures::inverter_toggling(vdd, load, period), m, o);
        const double p = measure_power(w, vdd, period, 3 * period);
        const double expected = fixtures::inverter_switched_cap(m, load) * vdd * vdd / period;
        v.require(std::abs(p / expected - 1) <= 0.15, fmt("P / fCV^2 = %.3f", p / expected));
        d << fmt(", P / fCV^2 %.3f", p / expected);
    }
    if (v.ok) v.detail = d.str();
    return v;
}

Verdict delay_trend() {
    Verdict v;
    auto reports = run_suite(suite_cells(), {3.0, 1.8}, ModelSet{});
    std::string d;
    for (std::size_t i = 0; i + 1 < reports.size(); i += 2) {
        const auto& hi = reports[i];
        const auto& lo = reports[i + 1];
        if (hi.distorted() || lo.distorted()) {
            v.require(!hi.operable || !lo.operable, hi.cell + " operable but distorted");
            continue;
        }
        v.require(*lo.delay > *hi.delay, hi.cell + fmt(": %.2f ps at 3.0 V vs %.2f ps at 1.8 V", *hi.delay * 1e12,
                                                        *lo.delay * 1e12));
        d += (d.empty() ? "" : ", ") + hi.cell + fmt(" %.1f -> %.1f ps", *hi.delay * 1e12, *lo.delay * 1e12);
    }
    if (v.ok) v.detail = d;
    return v;
}

Verdict sizing_contract() {
    Verdict v;
    SizingProblem p;
    p.cell = proposed_gdi_adder();
    p.tunable = all_devices(p.cell.circuit);
    p.vdd = 1.8;
    p.objective = Objective::Pdp;
    auto r = optimize(p, ModelSet{}, {}, 200);
    for (std::size_t i = 1; i < r.history.size(); ++i)
        v.require(r.history[i].objective <= r.history[i - 1].objective, "history rises at step " + std::to_string(i));
    v.require(r.objective <= r.initial_objective, "final PDP above initial");
    v.require(r.evaluations <= 200, "budget exceeded");
    if (v.ok)
        v.detail = fmt("PDP %.3f fJ -> %.3f fJ", r.initial_objective * 1e15, r.objective * 1e15) + " in " +
                   std::to_string(r.evaluations) + " evaluations";
    return v;
}

Verdict determinism() {
    Verdict v;
    const SuiteConfig cfg;
    auto once = [&] { return render(run_suite(suite_cells(), cfg.vdds, cfg.models, cfg.options), ReportFormat::Csv); };
    const std::string a = once();
    const std::string b = once();
    v.require(a == b, "CSV reports differ");
    if (v.ok) v.detail = std::to_string(a.size()) + " bytes identical across two runs";
    return v;
}

}  // namespace

int main() {
    criterion("transistor counts of the proposed adders", 1, table2_counts);
    criterion("GDI function table", 1, table1_rows);
    criterion("proposed adders equal the golden full adder", 60, golden_equivalence);
    criterion("carry and sum equations", 1e-3, equation_identity);
    criterion("threshold-drop law", 1, threshold_drop);
    criterion("2 Vt operability", 5, operability_rule);
    criterion("solver oracles", 60, solver_oracles);
    criterion("delay rises from 3.0 V to 1.8 V", 120, delay_trend);
    criterion("sizing history and final PDP", 600, sizing_contract);
    criterion("byte-identical bench CSV", 120, determinism);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}
