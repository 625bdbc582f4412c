#pragma once

// Switch-level evaluation with worst-case voltage bounds.
//
// Every net carries the best One level and the best Zero level that reach it
// through conducting transistors. An NMOS passes Zero unchanged but clips a
// One to (gate level - Vtn); a PMOS passes One unchanged but lifts a Zero to
// (gate level + |Vtp|). Gates read One at or above Vdd/2. Bounds are held in
// integer microvolts so the propagation lattice is finite.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellforge/cells.hpp"
#include "cellforge/netlist.hpp"

namespace cellforge {

struct SwitchParams {
    double vdd = 1.8;
    double vtn = 0.5;
    double vtp_abs = 0.5;
};

enum class Logic { Zero, One, HiZ, Conflict };
enum class Strength { Driven, Passed };

inline std::string_view to_string(Logic l) {
    switch (l) {
    case Logic::Zero: return "0";
    case Logic::One: return "1";
    case Logic::HiZ: return "Z";
    case Logic::Conflict: return "X";
    }
    return "?";
}

struct SignalState {
    Logic logic = Logic::HiZ;
    double vmax = 0.0;  // One level (valid for One / Conflict)
    double vmin = 0.0;  // Zero level (valid for Zero / Conflict)
    Strength strength = Strength::Passed;

    bool operator==(const SignalState&) const = default;

    /// The voltage a downstream gate sees, if the net carries a single value.
    std::optional<double> level() const {
        if (logic == Logic::One) return vmax;
        if (logic == Logic::Zero) return vmin;
        return std::nullopt;
    }
};

/// Vdd/2 reading of a net; nullopt for HiZ and Conflict.
inline std::optional<bool> interpret(const SignalState& s, double vdd) {
    auto v = s.level();
    if (!v) return std::nullopt;
    return *v >= vdd / 2;
}

struct SwitchEvaluation {
    std::map<std::string, SignalState> states;
    std::vector<std::string> warnings;

    const SignalState& at(const std::string& net) const { return states.at(net); }
};

namespace detail {

using MicroVolt = std::int64_t;

inline MicroVolt to_uv(double v) { return static_cast<MicroVolt>(std::llround(v * 1e6)); }
inline double from_uv(MicroVolt v) { return static_cast<double>(v) / 1e6; }

struct Bounds {
    std::optional<MicroVolt> one;
    std::optional<MicroVolt> zero;
    bool operator==(const Bounds&) const = default;
};

struct SwitchNet {
    std::vector<const Mosfet*> devices;
};

// Best One / Zero levels reachable from the fixed nets through on-devices.
// `gate_level` holds the gate voltage each on-device sees.
inline std::vector<Bounds> propagate(const std::vector<Bounds>& fixed, const std::vector<bool>& is_fixed,
                                     const std::vector<std::pair<int, int>>& channel,
                                     const std::vector<Polarity>& polarity,
                                     const std::vector<std::optional<MicroVolt>>& gate_level, MicroVolt vtn,
                                     MicroVolt vtp, MicroVolt vdd) {
    std::vector<Bounds> b = fixed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t d = 0; d < channel.size(); ++d) {
            if (!gate_level[d]) continue;
            const MicroVolt g = *gate_level[d];
            for (int dir = 0; dir < 2; ++dir) {
                const int from = dir == 0 ? channel[d].first : channel[d].second;
                const int to = dir == 0 ? channel[d].second : channel[d].first;
                if (is_fixed[static_cast<std::size_t>(to)]) continue;
                const Bounds& src = b[static_cast<std::size_t>(from)];
                Bounds& dst = b[static_cast<std::size_t>(to)];
                if (src.one) {
                    MicroVolt v = polarity[d] == Polarity::NMOS ? std::min(*src.one, g - vtn) : *src.one;
                    v = std::min(v, vdd);
                    if (v > 0 && (!dst.one || v > *dst.one)) {
                        dst.one = v;
                        changed = true;
                    }
                }
                if (src.zero) {
                    MicroVolt v = polarity[d] == Polarity::PMOS ? std::max(*src.zero, g + vtp) : *src.zero;
                    v = std::max<MicroVolt>(v, 0);
                    if (v < vdd && (!dst.zero || v < *dst.zero)) {
                        dst.zero = v;
                        changed = true;
                    }
                }
            }
        }
    }
    return b;
}

}  // namespace detail

/// Evaluates the circuit with input ports held at the given voltages.
/// Inputs at or above Vdd/2 are Ones with that level, others Zeros.
inline SwitchEvaluation evaluate_levels(const Circuit& c, const std::map<std::string, double>& input_volts,
                                        const SwitchParams& p) {
    using detail::Bounds;
    using detail::MicroVolt;
    const Ports& ports = c.ports();
    if (ports.vdd.empty()) throw Error("switch-level evaluation needs a vdd port");

    std::vector<std::string> names(c.nets().begin(), c.nets().end());
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
    const std::size_t n = names.size();

    const MicroVolt vdd = detail::to_uv(p.vdd);
    const MicroVolt vtn = detail::to_uv(p.vtn);
    const MicroVolt vtp = detail::to_uv(p.vtp_abs);
    const MicroVolt half = vdd / 2;

    std::vector<Bounds> fixed(n);
    std::vector<bool> is_fixed(n, false);
    std::vector<bool> is_rail(n, false);
    auto fix = [&](const std::string& net, MicroVolt v, bool rail) {
        auto i = static_cast<std::size_t>(index.at(net));
        is_fixed[i] = true;
        is_rail[i] = rail;
        fixed[i] = v >= half ? Bounds{v, std::nullopt} : Bounds{std::nullopt, v};
    };
    fix(std::string(kGround), 0, true);
    fix(ports.vdd, vdd, true);
    for (const auto& in : ports.inputs) {
        auto it = input_volts.find(in);
        if (it == input_volts.end()) throw Error("input port '" + in + "' is not assigned");
        fix(in, std::clamp(detail::to_uv(it->second), MicroVolt{0}, vdd), false);
    }

    const auto& mos = c.mosfets();
    std::vector<std::pair<int, int>> channel;
    std::vector<Polarity> polarity;
    std::vector<int> gate;
    for (const auto& m : mos) {
        channel.emplace_back(index.at(m.drain), index.at(m.source));
        polarity.push_back(m.polarity);
        gate.push_back(index.at(m.gate));
    }

    std::vector<Bounds> rails_only(n);
    for (std::size_t i = 0; i < n; ++i)
        if (is_rail[i]) rails_only[i] = fixed[i];

    SwitchEvaluation result;
    std::vector<Bounds> cur = fixed;
    std::vector<Bounds> rail_cur = rails_only;
    std::vector<std::optional<MicroVolt>> prev_gates;
    std::vector<std::optional<MicroVolt>> gates(mos.size());
    const std::size_t max_rounds = 2 * mos.size() + 4;
    bool settled = false;

    auto gate_for = [&](std::size_t d, const std::vector<Bounds>& b) -> std::optional<MicroVolt> {
        const Bounds& gb = b[static_cast<std::size_t>(gate[d])];
        if (gb.one && gb.zero) return std::nullopt;  // conflicting gate: treated as off
        std::optional<MicroVolt> level = gb.one ? gb.one : gb.zero;
        if (!level) return std::nullopt;
        const bool reads_one = *level >= half;
        const bool on = polarity[d] == Polarity::NMOS ? reads_one : !reads_one;
        return on ? level : std::nullopt;
    };

    for (std::size_t round = 0; round < max_rounds; ++round) {
        for (std::size_t d = 0; d < mos.size(); ++d) gates[d] = gate_for(d, cur);
        if (round > 0 && gates == prev_gates) {
            settled = true;
            break;
        }
        prev_gates = gates;
        cur = detail::propagate(fixed, is_fixed, channel, polarity, gates, vtn, vtp, vdd);
        rail_cur = detail::propagate(rails_only, is_fixed, channel, polarity, gates, vtn, vtp, vdd);
    }

    std::vector<bool> unstable(n, false);
    if (!settled) {
        // Oscillating feedback: nets whose value still moves are reported as Conflict.
        auto next = detail::propagate(fixed, is_fixed, channel, polarity, gates, vtn, vtp, vdd);
        for (std::size_t i = 0; i < n; ++i) unstable[i] = !(next[i] == cur[i]);
        result.warnings.push_back("switch network did not settle; unstable nets marked X");
    }

    for (std::size_t d = 0; d < mos.size(); ++d) {
        const Bounds& gb = cur[static_cast<std::size_t>(gate[d])];
        if (!gb.one && !gb.zero)
            result.warnings.push_back("gate of '" + mos[d].name + "' (net '" + mos[d].gate + "') is floating");
        else if (gb.one && gb.zero)
            result.warnings.push_back("gate of '" + mos[d].name + "' (net '" + mos[d].gate + "') is in conflict");
    }

    for (std::size_t i = 0; i < n; ++i) {
        SignalState s;
        const Bounds& b = cur[i];
        if (unstable[i] || (b.one && b.zero)) {
            s.logic = Logic::Conflict;
            s.vmax = b.one ? detail::from_uv(*b.one) : 0.0;
            s.vmin = b.zero ? detail::from_uv(*b.zero) : 0.0;
        } else if (b.one) {
            s.logic = Logic::One;
            s.vmax = detail::from_uv(*b.one);
        } else if (b.zero) {
            s.logic = Logic::Zero;
            s.vmin = detail::from_uv(*b.zero);
        }
        const Bounds& r = rail_cur[i];
        const bool full_rail = (s.logic == Logic::One && *b.one == vdd && r.one && *r.one == vdd) ||
                               (s.logic == Logic::Zero && *b.zero == 0 && r.zero && *r.zero == 0);
        s.strength = (is_fixed[i] || full_rail) ? Strength::Driven : Strength::Passed;
        result.states[names[i]] = s;
    }
    return result;
}

inline SwitchEvaluation evaluate(const Circuit& c, const std::map<std::string, bool>& inputs, const SwitchParams& p) {
    std::map<std::string, double> volts;
    for (const auto& [k, v] : inputs) volts[k] = v ? p.vdd : 0.0;
    return evaluate_levels(c, volts, p);
}

struct OutputObservation {
    SignalState state;
    std::optional<bool> bit;  // Vdd/2 reading; nullopt when HiZ or Conflict
    bool weak_one = false;    // One level at or below Vdd - |Vtp|
    bool weak_zero = false;   // Zero level at or above Vtn
};

struct TruthRow {
    std::size_t row = 0;
    std::vector<bool> inputs;
    std::map<std::string, OutputObservation> outputs;
    bool valid = true;
    std::vector<std::string> issues;

    bool degraded() const {
        for (const auto& [_, o] : outputs)
            if (o.weak_one || o.weak_zero) return true;
        return false;
    }
};

struct TruthTableResult {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::map<std::string, TruthFunction> functions;  // invalid rows read as 0
    std::vector<TruthRow> rows;
    std::vector<std::string> warnings;

    bool all_valid() const {
        return std::all_of(rows.begin(), rows.end(), [](const TruthRow& r) { return r.valid; });
    }

    /// Rows where some output disagrees with the golden reference (or is invalid).
    std::vector<std::size_t> mismatches(const std::map<std::string, TruthFunction>& golden) const {
        std::vector<std::size_t> bad;
        for (const auto& r : rows) {
            bool ok = r.valid;
            for (const auto& [port, fn] : golden) {
                auto it = r.outputs.find(port);
                if (it == r.outputs.end() || !it->second.bit || *it->second.bit != fn(r.row)) ok = false;
            }
            if (!ok) bad.push_back(r.row);
        }
        return bad;
    }
};

inline TruthTableResult truth_table(const Circuit& c, const SwitchParams& p) {
    TruthTableResult t;
    t.inputs = c.ports().inputs;
    t.outputs = c.ports().outputs;
    const int arity = static_cast<int>(t.inputs.size());
    const std::size_t nrows = std::size_t{1} << arity;
    std::map<std::string, std::vector<bool>> tables;
    for (const auto& o : t.outputs) tables[o].assign(nrows, false);

    for (std::size_t row = 0; row < nrows; ++row) {
        TruthRow r;
        r.row = row;
        r.inputs = TruthFunction::row_bits(arity, row);
        std::map<std::string, bool> assign;
        for (int i = 0; i < arity; ++i) assign[t.inputs[static_cast<std::size_t>(i)]] = r.inputs[static_cast<std::size_t>(i)];
        auto ev = evaluate(c, assign, p);
        for (auto& w : ev.warnings) {
            if (std::find(t.warnings.begin(), t.warnings.end(), w) == t.warnings.end()) t.warnings.push_back(w);
        }
        for (const auto& out : t.outputs) {
            OutputObservation o;
            o.state = ev.at(out);
            o.bit = interpret(o.state, p.vdd);
            // Inclusive: a level sitting exactly one threshold off the rail leaves
            // the downstream device at the edge of conduction.
            if (o.state.logic == Logic::One)
                o.weak_one = detail::to_uv(o.state.vmax) <= detail::to_uv(p.vdd - p.vtp_abs);
            if (o.state.logic == Logic::Zero) o.weak_zero = detail::to_uv(o.state.vmin) >= detail::to_uv(p.vtn);
            if (o.state.logic == Logic::HiZ) {
                r.valid = false;
                r.issues.push_back(out + " floats");
            } else if (o.state.logic == Logic::Conflict) {
                r.valid = false;
                r.issues.push_back(out + " has conflicting drivers");
            }
            if (o.bit) tables[out][row] = *o.bit;
            r.outputs[out] = o;
        }
        t.rows.push_back(std::move(r));
    }
    for (auto& [out, tab] : tables) t.functions[out] = TruthFunction(arity, std::move(tab));
    return t;
}

inline TruthTableResult truth_table(const CellSpec& spec, const SwitchParams& p) {
    return truth_table(spec.circuit, p);
}

struct Operability {
    bool operable = false;
    std::string reason;
};

/// Pass-transistor cells are usable only with Vdd >= 2 Vt and a truth table
/// that agrees with the golden reference on every row.
inline Operability operability(const CellSpec& spec, const SwitchParams& p) {
    const auto vt = std::max(detail::to_uv(p.vtn), detail::to_uv(p.vtp_abs));
    if (detail::to_uv(p.vdd) < 2 * vt) return {false, "vdd < 2·Vt"};
    auto t = truth_table(spec, p);
    if (!t.all_valid()) {
        for (const auto& r : t.rows)
            if (!r.valid) return {false, "row " + std::to_string(r.row) + ": " + r.issues.front()};
    }
    auto bad = t.mismatches(spec.golden);
    if (!bad.empty()) return {false, "truth table differs from reference at row " + std::to_string(bad.front())};
    return {true, "ok"};
}

}  // namespace cellforge
