#pragma once

// Level-1 (Shichman-Hodges) MOSFET model.

#include <cmath>
#include <utility>

#include "cellforge/netlist.hpp"

namespace cellforge {

struct DeviceModel {
    double vt0 = 0.5;          // V, negative for PMOS
    double kprime = 170e-6;    // A/V^2
    double lambda = 0.05;      // 1/V
    double cox_area = 8.5e-3;  // F/m^2 (8.5 fF/um^2)
    double cj_term = 1e-15;    // F per drain/source terminal

    bool operator==(const DeviceModel&) const = default;

    bool is_pmos() const { return vt0 < 0; }

    /// Each of Cgs and Cgd takes half of the gate oxide capacitance.
    double gate_cap_half(double w, double l) const { return 0.5 * cox_area * w * l; }
};

struct ModelSet {
    DeviceModel nmos{0.5, 170e-6, 0.05, 8.5e-3, 1e-15};
    DeviceModel pmos{-0.5, 60e-6, 0.05, 8.5e-3, 1e-15};
    double load = 10e-15;  // F on every output port in generated testbenches

    bool operator==(const ModelSet&) const = default;

    const DeviceModel& for_polarity(Polarity p) const { return p == Polarity::NMOS ? nmos : pmos; }
    double vtn() const { return nmos.vt0; }
    double vtp_abs() const { return -pmos.vt0; }
};

/// Drain current (into the drain) and its partial derivatives.
struct DeviceEval {
    double id = 0.0;
    double gm = 0.0;   // d id / d vgs
    double gds = 0.0;  // d id / d vds
};

namespace detail {

// NMOS-form evaluation for vds >= 0 and a positive threshold.
inline DeviceEval forward_nmos(double k, double vt, double lambda, double vgs, double vds) {
    const double vov = vgs - vt;
    if (vov <= 0) return {};
    const double clm = 1.0 + lambda * vds;
    if (vds < vov) {
        const double core = vov * vds - 0.5 * vds * vds;
        return {k * core * clm, k * vds * clm, k * (vov - vds) * clm + k * core * lambda};
    }
    const double core = 0.5 * vov * vov;
    return {k * core * clm, k * vov * clm, k * core * lambda};
}

// NMOS-form evaluation for any vds: the channel is symmetric, so for vds < 0
// the roles of drain and source swap.
inline DeviceEval symmetric_nmos(double k, double vt, double lambda, double vgs, double vds) {
    if (vds >= 0) return forward_nmos(k, vt, lambda, vgs, vds);
    // i(vgs, vds) = -f(vgs - vds, -vds)
    const DeviceEval f = forward_nmos(k, vt, lambda, vgs - vds, -vds);
    return {-f.id, -f.gm, f.gm + f.gds};
}

}  // namespace detail

inline DeviceEval device_eval(const DeviceModel& m, double w, double l, double vgs, double vds) {
    const double k = m.kprime * w / l;
    if (!m.is_pmos()) return detail::symmetric_nmos(k, m.vt0, m.lambda, vgs, vds);
    // PMOS: i(vgs, vds) = -n(-vgs, -vds) with |Vt|
    const DeviceEval n = detail::symmetric_nmos(k, -m.vt0, m.lambda, -vgs, -vds);
    return {-n.id, n.gm, n.gds};
}

inline double device_current(const DeviceModel& m, double w, double l, double vgs, double vds) {
    return device_eval(m, w, l, vgs, vds).id;
}

}  // namespace cellforge
