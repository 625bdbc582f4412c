#pragma once

#include <random>
#include <string>

#include "cellforge/netlist.hpp"

namespace cellforge {

/// Random structurally valid circuit for fuzz corpora. Values are drawn so
/// that every device respects the construction invariants.
inline Circuit random_circuit(std::mt19937_64& rng, int max_devices = 24) {
    std::uniform_int_distribution<int> count(1, max_devices);
    std::uniform_int_distribution<int> kind(0, 9);
    std::uniform_int_distribution<int> net_pick(0, 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto net = [&] {
        int k = net_pick(rng);
        return k == 0 ? std::string(kGround) : "n" + std::to_string(k);
    };
    auto pretty = [&](double lo, double hi) {
        // Mix round and arbitrary mantissas so the writer exercises both paths.
        double v = lo + (hi - lo) * unit(rng);
        return unit(rng) < 0.5 ? std::round(v / lo) * lo : v;
    };

    Circuit c;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        const int k = kind(rng);
        if (k < 6) {
            Mosfet m{"M" + std::to_string(i), k % 2 ? Polarity::PMOS : Polarity::NMOS, net(), net(), net(), net(),
                     pretty(2e-6, 40e-6), pretty(0.18e-6, 2e-6)};
            c.add(std::move(m));
        } else if (k < 8) {
            c.add(Capacitor{"C" + std::to_string(i), net(), net(), pretty(1e-15, 1e-12)});
        } else if (k == 8) {
            c.add(IndependentSource{"V" + std::to_string(i), net(), std::string(kGround), DcWave{pretty(0.1, 5.0)}});
        } else {
            double rise = pretty(1e-12, 1e-10), fall = pretty(1e-12, 1e-10), width = pretty(1e-9, 1e-8);
            PulseWave p{0.0, pretty(0.5, 3.3), pretty(1e-9, 1e-8), rise, fall, width, (width + rise + fall) * 2.0};
            c.add(IndependentSource{"V" + std::to_string(i), net(), std::string(kGround), p});
        }
    }
    if (unit(rng) < 0.7) c.set_ports(Ports{{"n1", "n2"}, {"n3"}, "n4"});
    return c;
}

}  // namespace cellforge
