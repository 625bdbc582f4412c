#pragma once

// Standard stimulus, testbench assembly and waveform measurements
// (50%-50% delay, average supply power, PDP, digitized truth tables).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cellforge/cells.hpp"
#include "cellforge/error.hpp"
#include "cellforge/netlist.hpp"
#include "cellforge/transient.hpp"

namespace cellforge {

/// Binary count over the inputs (first input is the MSB), one state per
/// period, repeated `laps` times. Measurements use the last lap.
struct Stimulus {
    double period = 10e-9;  // 100 MHz
    int laps = 2;
    double edge = 50e-12;

    double lap_length(std::size_t arity) const { return period * static_cast<double>(std::size_t{1} << arity); }
    double tstop(std::size_t arity) const { return lap_length(arity) * laps; }
    double measure_from(std::size_t arity) const { return lap_length(arity) * (laps - 1); }
};

/// Wraps a cell with a supply, one PULSE source per input and a load
/// capacitor on every output.
inline Circuit make_testbench(const Circuit& cell, double vdd, double load, const Stimulus& stim = {}) {
    const Ports& ports = cell.ports();
    if (ports.vdd.empty()) throw CircuitError("testbench needs a vdd port");
    if (!cell.sources().empty()) throw CircuitError("circuit already contains sources");
    Circuit tb = cell;
    tb.add(IndependentSource{"VDD", ports.vdd, std::string(kGround), DcWave{vdd}});
    const std::size_t n = ports.inputs.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double half = stim.period * static_cast<double>(std::size_t{1} << (n - 1 - i));
        PulseWave p{0.0, vdd, half, stim.edge, stim.edge, half - stim.edge, 2 * half};
        tb.add(IndependentSource{"VIN_" + ports.inputs[i], ports.inputs[i], std::string(kGround), p});
    }
    if (load > 0)
        for (const auto& out : ports.outputs) tb.add(Capacitor{"CL_" + out, out, std::string(kGround), load});
    return tb;
}

/// Sample instants for each input row of the measured lap, just before the
/// inputs move on to the next state.
inline std::vector<double> sample_times(std::size_t arity, const Stimulus& stim = {}) {
    std::vector<double> t;
    const double base = stim.measure_from(arity);
    for (std::size_t row = 0; row < (std::size_t{1} << arity); ++row)
        t.push_back(base + (static_cast<double>(row) + 0.99) * stim.period);
    return t;
}

/// Truth table read from a testbench waveform with a Vdd/2 threshold.
inline std::map<std::string, TruthFunction> transient_truth_table(const Waveform& w, const Ports& ports, double vdd,
                                                                   const Stimulus& stim = {}) {
    const std::size_t n = ports.inputs.size();
    const auto times = sample_times(n, stim);
    std::map<std::string, TruthFunction> out;
    for (const auto& o : ports.outputs) {
        std::vector<bool> table;
        for (double t : times) table.push_back(w.value_at(o, t) >= vdd / 2);
        out[o] = TruthFunction(static_cast<int>(n), std::move(table));
    }
    return out;
}

/// Times at which a sampled signal crosses `level`, linearly interpolated.
inline std::vector<double> crossings(const Waveform& w, const std::string& net, double level, double t_from = 0,
                                     double t_to = std::numeric_limits<double>::infinity()) {
    const auto& v = w.volts(net);
    std::vector<double> out;
    for (std::size_t i = 1; i < w.times.size(); ++i) {
        const double a = v[i - 1] - level, b = v[i] - level;
        if ((a < 0 && b >= 0) || (a >= 0 && b < 0)) {
            const double t = w.times[i - 1] + (w.times[i] - w.times[i - 1]) * a / (a - b);
            if (t >= t_from && t <= t_to) out.push_back(t);
        }
    }
    return out;
}

struct DelayWindow {
    double from = 0.0;
    double to = std::numeric_limits<double>::infinity();
    // An output crossing further than this after an input edge is not
    // attributed to that edge.
    double max_response = std::numeric_limits<double>::infinity();
};

/// Worst-case 50%-50% delay from `in_port` edges to `out_port` crossings.
inline double measure_delay(const Waveform& w, const std::string& in_port, const std::string& out_port, double vdd,
                            const DelayWindow& win = {}) {
    const double half = vdd / 2;
    const auto in = crossings(w, in_port, half, win.from, win.to);
    if (in.empty()) throw NoTransition("input '" + in_port + "' has no transition in the window");
    const auto out = crossings(w, out_port, half, win.from);
    double worst = -1.0;
    for (double t : in) {
        auto it = std::lower_bound(out.begin(), out.end(), t - 1e-15);
        if (it == out.end()) continue;
        const double d = std::max(0.0, *it - t);
        if (d <= win.max_response) worst = std::max(worst, d);
    }
    if (worst < 0) throw NoTransition("output '" + out_port + "' never responds to '" + in_port + "'");
    return worst;
}

/// Energy drawn from the supply over [from, to].
inline double supply_energy(const Waveform& w, double vdd, double from, double to) {
    if (!(to > from)) throw WindowTooShort("measurement window is empty");
    if (w.times.size() < 2 || from < w.times.front() - 1e-18 || to > w.times.back() * (1 + 1e-12))
        throw WindowTooShort("measurement window is not covered by the waveform");
    double q = 0.0;
    double t_prev = from;
    double i_prev = w.current_at(from);
    auto it = std::upper_bound(w.times.begin(), w.times.end(), from);
    for (; it != w.times.end() && *it < to; ++it) {
        const auto k = static_cast<std::size_t>(it - w.times.begin());
        q += 0.5 * (i_prev + w.supply_current[k]) * (*it - t_prev);
        t_prev = *it;
        i_prev = w.supply_current[k];
    }
    q += 0.5 * (i_prev + w.current_at(to)) * (to - t_prev);
    return vdd * q;
}

/// Average supply power over [from, to].
inline double measure_power(const Waveform& w, double vdd, double from, double to) {
    return supply_energy(w, vdd, from, to) / (to - from);
}

inline double pdp(double delay, double power) { return delay * power; }

}  // namespace cellforge
