#pragma once

// Width optimisation by coordinate descent with multiplicative steps.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cellforge/bench.hpp"
#include "cellforge/cells.hpp"
#include "cellforge/error.hpp"
#include "cellforge/netlist.hpp"

namespace cellforge {

enum class Objective { Pdp, Delay, Power };

inline std::optional<Objective> parse_objective(std::string_view s) {
    std::string l = detail::lower(s);
    if (l == "pdp") return Objective::Pdp;
    if (l == "delay") return Objective::Delay;
    if (l == "power") return Objective::Power;
    return std::nullopt;
}

inline std::string_view to_string(Objective o) {
    switch (o) {
    case Objective::Pdp: return "pdp";
    case Objective::Delay: return "delay";
    case Objective::Power: return "power";
    }
    return "?";
}

using Widths = std::map<std::string, double>;

struct SizingProblem {
    CellSpec cell;
    std::vector<std::string> tunable;  // cycled in this order
    double w_min = kMinFeatureWidth;
    double w_max = 20e-6;
    double vdd = 1.8;
    Objective objective = Objective::Pdp;
    // Devices moved together by one factor; each must be in `tunable`.
    // Tunable devices not in any group move alone.
    std::vector<std::vector<std::string>> ganged;
};

struct SizingStep {
    Widths widths;          // incumbent after this evaluation
    double objective = 0;   // incumbent objective
    double candidate = 0;   // objective of the point evaluated
    std::string note;
};

struct SizingResult {
    Widths widths;
    double objective = 0;
    double initial_objective = 0;
    std::vector<SizingStep> history;
    int evaluations = 0;
};

/// Every transistor in the cell, in netlist order.
inline std::vector<std::string> all_devices(const Circuit& c) {
    std::vector<std::string> names;
    for (const auto& m : c.mosfets()) names.push_back(m.name);
    return names;
}

/// P/N pairs that share gate and drain (inverter-like halves), restricted to
/// `tunable`. Each device joins at most one pair.
inline std::vector<std::vector<std::string>> pn_pairs(const Circuit& c, const std::vector<std::string>& tunable) {
    std::set<std::string> open(tunable.begin(), tunable.end());
    std::vector<std::vector<std::string>> pairs;
    for (const auto& p : c.mosfets()) {
        if (p.polarity != Polarity::PMOS || !open.count(p.name)) continue;
        for (const auto& n : c.mosfets()) {
            if (n.polarity != Polarity::NMOS || !open.count(n.name)) continue;
            const bool shares_drain = n.drain == p.drain || n.source == p.drain || n.drain == p.source;
            if (n.gate == p.gate && shares_drain) {
                pairs.push_back({p.name, n.name});
                open.erase(p.name);
                open.erase(n.name);
                break;
            }
        }
    }
    return pairs;
}

inline Widths current_widths(const Circuit& c, const std::vector<std::string>& devices) {
    Widths w;
    for (const auto& d : devices) {
        const Mosfet* m = c.find_mosfet(d);
        if (!m) throw Error("no transistor named '" + d + "'");
        w[d] = m->width;
    }
    return w;
}

/// Simulates the cell with `widths` patched in; distorted or failed runs
/// give +infinity.
inline double objective_eval(const CellSpec& cell, const Widths& widths, double vdd, Objective objective,
                             const ModelSet& models, const BenchOptions& opt = {}) {
    CellSpec patched = cell;
    for (const auto& [name, w] : widths) patched.circuit.set_width(name, w);
    const MeasurementReport r = measure_cell(patched, vdd, models, opt);
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (r.distorted() || !r.power) return inf;
    switch (objective) {
    case Objective::Pdp: return *r.pdp;
    case Objective::Delay: return *r.delay;
    case Objective::Power: return *r.power;
    }
    return inf;
}

inline SizingResult optimize(const SizingProblem& p, const ModelSet& models, const BenchOptions& opt, int budget) {
    if (budget < 1) throw Error("sizing budget must be at least 1");
    if (p.tunable.empty()) throw Error("no tunable transistors");
    if (p.w_min < kMinFeatureWidth) throw Error("w_min is below the 2 um minimum feature width");
    if (!(p.w_min < p.w_max)) throw Error("w_min must be below w_max");

    // Knobs: ganged groups first in tunable order, then single devices.
    std::vector<std::vector<std::string>> knobs;
    std::set<std::string> grouped;
    for (const auto& g : p.ganged)
        for (const auto& d : g) {
            if (std::find(p.tunable.begin(), p.tunable.end(), d) == p.tunable.end())
                throw Error("ganged device '" + d + "' is not tunable");
            grouped.insert(d);
        }
    std::set<std::size_t> placed;
    for (const auto& d : p.tunable) {
        if (!grouped.count(d)) {
            knobs.push_back({d});
            continue;
        }
        for (std::size_t g = 0; g < p.ganged.size(); ++g)
            if (!placed.count(g) && std::find(p.ganged[g].begin(), p.ganged[g].end(), d) != p.ganged[g].end()) {
                knobs.push_back(p.ganged[g]);
                placed.insert(g);
            }
    }

    SizingResult res;
    Widths best = current_widths(p.cell.circuit, p.tunable);
    std::string start_note = "initial";
    for (auto& [name, w] : best) {
        const double c = std::clamp(w, p.w_min, p.w_max);
        if (c != w) start_note = "initial (clamped into bounds)";
        w = c;
    }
    auto eval = [&](const Widths& w) { return objective_eval(p.cell, w, p.vdd, p.objective, models, opt); };

    double fbest = eval(best);
    res.evaluations = 1;
    if (!std::isfinite(fbest)) throw InfeasibleStart("the cell does not simulate cleanly at its initial widths");
    res.initial_objective = fbest;
    res.history.push_back({best, fbest, fbest, start_note});

    const double step = 1.25;
    const bool parallel = opt.jobs != 1;
    bool stop = false;
    while (!stop && res.evaluations < budget) {
        const double cycle_start = fbest;
        bool evaluated_any = false;
        for (const auto& knob : knobs) {
            if (res.evaluations >= budget) {
                stop = true;
                break;
            }
            struct Candidate {
                Widths widths;
                std::string label;
                double f = 0;
            };
            std::vector<Candidate> cands;
            for (double factor : {step, 1 / step}) {
                Widths w = best;
                for (const auto& d : knob) w[d] = std::clamp(best.at(d) * factor, p.w_min, p.w_max);
                if (w == best) continue;
                std::string label;
                for (const auto& d : knob) label += (label.empty() ? "" : "+") + d;
                label += factor > 1 ? " x1.25" : " /1.25";
                cands.push_back({std::move(w), std::move(label)});
            }
            const auto room = static_cast<std::size_t>(budget - res.evaluations);
            if (cands.size() > room) cands.resize(room);
            if (cands.empty()) continue;
            evaluated_any = true;

            if (parallel && cands.size() > 1) {
                std::vector<std::future<double>> fut;
                for (const auto& c : cands) fut.push_back(std::async(std::launch::async, eval, c.widths));
                for (std::size_t i = 0; i < cands.size(); ++i) cands[i].f = fut[i].get();
            } else {
                for (auto& c : cands) c.f = eval(c.widths);
            }
            res.evaluations += static_cast<int>(cands.size());

            // The incumbent after each evaluation is the best point seen so
            // far, so the recorded objective never increases.
            for (const auto& c : cands) {
                std::string verdict = "rejected";
                if (!std::isfinite(c.f)) {
                    verdict = "discarded (distorted or failed)";
                } else if (c.f < fbest) {
                    best = c.widths;
                    fbest = c.f;
                    verdict = "accepted";
                }
                res.history.push_back({best, fbest, c.f, c.label + " " + verdict});
            }
        }
        if (!evaluated_any) break;
        if (cycle_start - fbest < 0.005 * cycle_start) break;
    }
    res.widths = best;
    res.objective = fbest;
    return res;
}

}  // namespace cellforge
