#pragma once

// Small analog fixtures shared by the solver tests and the acceptance run.

#include <cmath>

#include "cellforge/device.hpp"
#include "cellforge/netlist.hpp"

namespace fixtures {

using namespace cellforge;

inline constexpr double kL = 0.18e-6;
inline constexpr double kWn = 2e-6;
inline constexpr double kWp = 4e-6;

/// CMOS inverter in -> out, no sources.
inline Circuit inverter_core(double wn = kWn, double wp = kWp) {
    Circuit c;
    c.add(Mosfet{"MP", Polarity::PMOS, "out", "in", "vdd", "vdd", wp, kL});
    c.add(Mosfet{"MN", Polarity::NMOS, "out", "in", "0", "0", wn, kL});
    c.set_ports(Ports{{"in"}, {"out"}, "vdd"});
    return c;
}

/// Inverter with a DC input.
inline Circuit inverter_dc(double vdd, double vin) {
    Circuit c = inverter_core();
    c.add(IndependentSource{"VDD", "vdd", "0", DcWave{vdd}});
    c.add(IndependentSource{"VIN", "in", "0", DcWave{vin}});
    return c;
}

/// Inverter driving `load`, input a square wave of the given period.
inline Circuit inverter_toggling(double vdd, double load, double period, double edge = 50e-12) {
    Circuit c = inverter_core();
    c.add(Capacitor{"CL", "out", "0", load});
    c.add(IndependentSource{"VDD", "vdd", "0", DcWave{vdd}});
    c.add(IndependentSource{"VIN", "in", "0", PulseWave{0, vdd, period / 2, edge, edge, period / 2 - edge, period}});
    return c;
}

/// Models with no device capacitance, so a fixture's only C is explicit.
inline ModelSet capless_models() {
    ModelSet m;
    m.nmos.cox_area = m.pmos.cox_area = 0;
    m.nmos.cj_term = m.pmos.cj_term = 0;
    return m;
}

/// First-order RC: an NMOS held deep in triode acts as the resistor.
/// A 10 mV step keeps vds/(2 vov) below 0.1%.
struct RcFixture {
    Circuit circuit;
    double r = 0, c = 0;
    double step_at = 1e-9;
    double amplitude = 0.01;
};

inline RcFixture rc_lowpass(const ModelSet& m, double cap = 100e-15, double w = 2e-6, double l = 20e-6) {
    RcFixture f;
    const double vg = 10.0;
    f.c = cap;
    f.r = 1.0 / (m.nmos.kprime * w / l * (vg - m.nmos.vt0));
    f.circuit.add(Mosfet{"MR", Polarity::NMOS, "in", "g", "out", "0", w, l});
    f.circuit.add(Capacitor{"C1", "out", "0", cap});
    f.circuit.add(IndependentSource{"VG", "g", "0", DcWave{vg}});
    f.circuit.add(IndependentSource{"VIN", "in", "0",
                                    PulseWave{0, f.amplitude, f.step_at, 1e-12, 1e-12, 1e-6, 2e-6}});
    return f;
}

/// Switched capacitance of an inverter output per cycle: load, drain
/// junctions and the gate-drain (Miller) caps, which swing by 2 Vdd.
inline double inverter_switched_cap(const ModelSet& m, double load) {
    return load + m.nmos.cj_term + m.pmos.cj_term +
           2 * (m.nmos.gate_cap_half(kWn, kL) + m.pmos.gate_cap_half(kWp, kL));
}

}  // namespace fixtures
