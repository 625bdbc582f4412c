#pragma once

// Modified nodal analysis: node voltages plus one branch current per voltage
// source. Newton-Raphson at every time point, trapezoidal companion models for
// capacitors, backward Euler on the first step after a source corner.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellforge/device.hpp"
#include "cellforge/error.hpp"
#include "cellforge/netlist.hpp"

namespace cellforge {

struct SimOptions {
    double tstep = 5e-12;
    double tstop = 160e-9;
    double newton_tol_v = 1e-6;
    double newton_tol_i = 1e-9;
    int max_newton_iters = 100;
    double gmin = 1e-12;
    double max_newton_step = 0.5;  // V, per-node Newton update limit
    // Skip the operating point and start from these node voltages (0 elsewhere).
    std::optional<std::map<std::string, double>> initial_conditions;

    void check() const {
        if (!(tstep > 0) || !(tstop > tstep)) throw Error("simulation needs 0 < tstep < tstop");
        if (!(newton_tol_v > 0) || !(newton_tol_i > 0)) throw Error("Newton tolerances must be positive");
        if (max_newton_iters < 1) throw Error("max_newton_iters must be at least 1");
        if (gmin < 0) throw Error("gmin must be non-negative");
    }
};

struct Waveform {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> node_volts;
    std::vector<double> supply_current;  // A, delivered by the supply source

    std::size_t size() const { return times.size(); }

    const std::vector<double>& volts(const std::string& net) const {
        auto it = node_volts.find(net);
        if (it != node_volts.end()) return it->second;
        if (net == kGround) {
            static thread_local std::vector<double> zeros;
            zeros.assign(times.size(), 0.0);
            return zeros;
        }
        throw Error("waveform has no net '" + net + "'");
    }

    /// Linear interpolation; clamps outside the sampled span.
    double value_at(const std::string& net, double t) const { return interpolate(volts(net), t); }
    double current_at(double t) const { return interpolate(supply_current, t); }

private:
    double interpolate(const std::vector<double>& v, double t) const {
        if (times.empty()) throw Error("empty waveform");
        if (t <= times.front()) return v.front();
        if (t >= times.back()) return v.back();
        auto it = std::upper_bound(times.begin(), times.end(), t);
        const auto i = static_cast<std::size_t>(it - times.begin());
        const double t0 = times[i - 1], t1 = times[i];
        return v[i - 1] + (v[i] - v[i - 1]) * (t - t0) / (t1 - t0);
    }
};

/// The voltage source that powers the circuit: the one tied from the vdd port
/// (or a net named "vdd") to ground. Returns -1 when there is none.
inline int supply_source_index(const Circuit& c) {
    std::string vdd = c.ports().vdd.empty() ? "vdd" : c.ports().vdd;
    const auto& s = c.sources();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i].positive == vdd && s[i].negative == kGround) return static_cast<int>(i);
    return -1;
}

namespace detail {

class Mna {
public:
    Mna(const Circuit& c, const ModelSet& models, const SimOptions& opt) : opt_(opt) {
        for (const auto& n : c.nets())
            if (n != kGround) {
                index_[n] = static_cast<int>(names_.size());
                names_.push_back(n);
            }
        nodes_ = static_cast<int>(names_.size());
        for (const auto& s : c.sources()) names_.push_back("branch of " + s.name);
        size_ = static_cast<int>(names_.size());

        for (const auto& m : c.mosfets()) {
            const DeviceModel& dm = models.for_polarity(m.polarity);
            devices_.push_back({node(m.drain), node(m.gate), node(m.source), &dm, m.width, m.length});
            const double half = dm.gate_cap_half(m.width, m.length);
            add_cap(node(m.gate), node(m.source), half);
            add_cap(node(m.gate), node(m.drain), half);
            add_cap(node(m.drain), -1, dm.cj_term);
            add_cap(node(m.source), -1, dm.cj_term);
        }
        for (const auto& cap : c.capacitors()) add_cap(node(cap.positive), node(cap.negative), cap.value);
        for (const auto& s : c.sources()) vsrc_.push_back({node(s.positive), node(s.negative), &s});

        jac_.resize(size_, size_);
        rhs_.resize(size_);
        supply_ = supply_source_index(c);
    }

    int size() const { return size_; }
    int nodes() const { return nodes_; }
    const std::vector<std::string>& names() const { return names_; }
    int node(const std::string& n) const { return n == kGround ? -1 : index_.at(n); }
    int supply() const { return supply_; }

    enum class Method { None, BackwardEuler, Trapezoidal };

    struct CapState {
        double v = 0.0;  // voltage across at the last accepted point
        double i = 0.0;  // current through at the last accepted point
    };

    std::vector<CapState> cap_states(const Eigen::VectorXd& x) const {
        std::vector<CapState> s(caps_.size());
        for (std::size_t k = 0; k < caps_.size(); ++k) s[k].v = across(x, caps_[k].a, caps_[k].b);
        return s;
    }

    void advance_caps(std::vector<CapState>& s, const Eigen::VectorXd& x, double h, Method m) const {
        for (std::size_t k = 0; k < caps_.size(); ++k) {
            const double v = across(x, caps_[k].a, caps_[k].b);
            const double cap = caps_[k].value;
            s[k].i = m == Method::Trapezoidal ? 2 * cap / h * (v - s[k].v) - s[k].i : cap / h * (v - s[k].v);
            s[k].v = v;
        }
    }

    struct Outcome {
        bool converged = false;
        int iterations = 0;
        int worst = 0;
    };

    /// Newton solve at time t. `x` holds the initial guess and receives the result.
    Outcome solve(Eigen::VectorXd& x, double t, double h, Method method, const std::vector<CapState>* caps,
                  double source_scale = 1.0) {
        Outcome out;
        for (int iter = 1; iter <= opt_.max_newton_iters; ++iter) {
            out.iterations = iter;
            assemble(x, t, h, method, caps, source_scale);

            double residual = 0.0;
            if (iter > 1) {
                Eigen::VectorXd r = jac_.topRows(nodes_) * x - rhs_.head(nodes_);
                residual = r.cwiseAbs().maxCoeff();
            }
            lu_.compute(jac_);
            check_pivots();
            Eigen::VectorXd xn = lu_.solve(rhs_);
            if (!xn.allFinite()) throw SingularMatrix(names_);

            double worst_dv = 0.0;
            for (int i = 0; i < size_; ++i) {
                double d = xn[i] - x[i];
                if (i < nodes_) {
                    d = std::clamp(d, -opt_.max_newton_step, opt_.max_newton_step);
                    if (std::abs(d) > worst_dv) {
                        worst_dv = std::abs(d);
                        out.worst = i;
                    }
                }
                x[i] += d;
            }
            if (iter > 1 && worst_dv < opt_.newton_tol_v && residual < opt_.newton_tol_i) {
                out.converged = true;
                return out;
            }
        }
        return out;
    }

    double supply_current(const Eigen::VectorXd& x) const {
        // The branch unknown is the current entering the positive terminal.
        return supply_ < 0 ? 0.0 : -x[nodes_ + supply_];
    }

private:
    struct Dev {
        int d, g, s;
        const DeviceModel* model;
        double w, l;
    };
    struct Cap {
        int a, b;
        double value;
    };
    struct Src {
        int p, n;
        const IndependentSource* src;
    };

    void add_cap(int a, int b, double value) {
        if (a == b || value <= 0) return;
        caps_.push_back({a, b, value});
    }

    static double at(const Eigen::VectorXd& x, int i) { return i < 0 ? 0.0 : x[i]; }
    static double across(const Eigen::VectorXd& x, int a, int b) { return at(x, a) - at(x, b); }

    void add(int r, int c, double v) {
        if (r >= 0 && c >= 0) jac_(r, c) += v;
    }
    void inject(int r, double v) {
        if (r >= 0) rhs_[r] += v;
    }

    void stamp_conductance(int a, int b, double g) {
        add(a, a, g);
        add(b, b, g);
        add(a, b, -g);
        add(b, a, -g);
    }

    void assemble(const Eigen::VectorXd& x, double t, double h, Method method, const std::vector<CapState>* caps,
                  double scale) {
        jac_.setZero();
        rhs_.setZero();
        for (int i = 0; i < nodes_; ++i) jac_(i, i) += opt_.gmin;

        if (method != Method::None) {
            for (std::size_t k = 0; k < caps_.size(); ++k) {
                const Cap& cp = caps_[k];
                const CapState& st = (*caps)[k];
                const double g = method == Method::Trapezoidal ? 2 * cp.value / h : cp.value / h;
                const double ieq = method == Method::Trapezoidal ? g * st.v + st.i : g * st.v;
                stamp_conductance(cp.a, cp.b, g);
                inject(cp.a, ieq);
                inject(cp.b, -ieq);
            }
        }

        for (const Dev& dv : devices_) {
            const double vgs = at(x, dv.g) - at(x, dv.s);
            const double vds = at(x, dv.d) - at(x, dv.s);
            const DeviceEval e = device_eval(*dv.model, dv.w, dv.l, vgs, vds);
            const double ieq = e.id - e.gm * vgs - e.gds * vds;
            // Linearised drain current leaves the drain and enters the source.
            add(dv.d, dv.g, e.gm);
            add(dv.d, dv.d, e.gds);
            add(dv.d, dv.s, -(e.gm + e.gds));
            add(dv.s, dv.g, -e.gm);
            add(dv.s, dv.d, -e.gds);
            add(dv.s, dv.s, e.gm + e.gds);
            inject(dv.d, -ieq);
            inject(dv.s, ieq);
        }

        for (std::size_t k = 0; k < vsrc_.size(); ++k) {
            const int row = nodes_ + static_cast<int>(k);
            const Src& s = vsrc_[k];
            add(s.p, row, 1.0);
            add(s.n, row, -1.0);
            add(row, s.p, 1.0);
            add(row, s.n, -1.0);
            rhs_[row] = scale * s.src->value_at(t);
        }
    }

    void check_pivots() const {
        const auto& m = lu_.matrixLU();
        const double scale = m.cwiseAbs().maxCoeff();
        std::vector<std::string> bad;
        for (int i = 0; i < size_; ++i)
            if (std::abs(m(i, i)) <= 1e-15 * scale) bad.push_back(names_[static_cast<std::size_t>(i)]);
        if (!bad.empty()) throw SingularMatrix(bad);
    }

    SimOptions opt_;
    std::map<std::string, int> index_;
    std::vector<std::string> names_;
    int nodes_ = 0;
    int size_ = 0;
    int supply_ = -1;
    std::vector<Dev> devices_;
    std::vector<Cap> caps_;
    std::vector<Src> vsrc_;
    Eigen::MatrixXd jac_;
    Eigen::VectorXd rhs_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// DC solve with capacitors open. Falls back to ramping every source up from
// zero when the direct attempt fails.
inline Eigen::VectorXd dc_solve(Mna& mna, const SimOptions& opt) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(mna.size());
    auto direct = mna.solve(x, 0.0, 0.0, Mna::Method::None, nullptr);
    if (direct.converged) return x;

    x.setZero();
    double scale = 0.0;
    double step = 0.1;
    Mna::Outcome last = direct;
    while (scale < 1.0) {
        const double next = std::min(1.0, scale + step);
        Eigen::VectorXd trial = x;
        last = mna.solve(trial, 0.0, 0.0, Mna::Method::None, nullptr, next);
        if (last.converged) {
            x = trial;
            scale = next;
            step = std::min(0.25, step * 2);
        } else {
            step /= 2;
            if (step < 1e-4)
                throw NonConvergence(opt.max_newton_iters, mna.names()[static_cast<std::size_t>(last.worst)]);
        }
    }
    return x;
}

}  // namespace detail

inline std::map<std::string, double> dc_operating_point(const Circuit& c, const ModelSet& models,
                                                        const SimOptions& opt = {}) {
    if (!(opt.newton_tol_v > 0) || !(opt.newton_tol_i > 0)) throw Error("Newton tolerances must be positive");
    detail::Mna mna(c, models, opt);
    Eigen::VectorXd x = detail::dc_solve(mna, opt);
    std::map<std::string, double> out;
    for (int i = 0; i < mna.nodes(); ++i) out[mna.names()[static_cast<std::size_t>(i)]] = x[i];
    out[std::string(kGround)] = 0.0;
    return out;
}

inline Waveform transient(const Circuit& c, const ModelSet& models, const SimOptions& opt) {
    opt.check();
    using Method = detail::Mna::Method;
    detail::Mna mna(c, models, opt);
    const int nodes = mna.nodes();

    Eigen::VectorXd x;
    if (opt.initial_conditions) {
        x = Eigen::VectorXd::Zero(mna.size());
        for (const auto& [net, v] : *opt.initial_conditions)
            if (net != kGround && c.has_net(net)) x[mna.node(net)] = v;
    } else {
        x = detail::dc_solve(mna, opt);
    }

    // Corners of every PULSE source; steps land on them exactly.
    std::vector<double> corners{opt.tstop};
    for (const auto& s : c.sources())
        if (const auto* p = std::get_if<PulseWave>(&s.wave))
            for (double b : p->breakpoints(opt.tstop))
                if (b > 0) corners.push_back(b);
    std::sort(corners.begin(), corners.end());
    corners.erase(std::unique(corners.begin(), corners.end(),
                              [&](double a, double b) { return b - a < 1e-6 * opt.tstep; }),
                  corners.end());

    Waveform w;
    std::vector<std::vector<double>> volts(static_cast<std::size_t>(nodes));
    const std::size_t reserve = static_cast<std::size_t>(opt.tstop / opt.tstep) + corners.size() + 16;
    for (auto& v : volts) v.reserve(reserve);
    w.times.reserve(reserve);
    w.supply_current.reserve(reserve);
    auto record = [&](double t) {
        w.times.push_back(t);
        for (int i = 0; i < nodes; ++i) volts[static_cast<std::size_t>(i)].push_back(x[i]);
        w.supply_current.push_back(mna.supply_current(x));
    };

    std::vector<detail::Mna::CapState> caps = mna.cap_states(x);
    double t = 0.0;
    double h = opt.tstep;
    bool after_corner = true;
    std::size_t next_corner = 0;
    // With initial conditions the sources may jump at t=0; the first
    // backward-Euler step absorbs that.
    record(t);

    const double min_step = opt.tstep / 64;
    while (t < opt.tstop * (1 - 1e-12)) {
        while (next_corner < corners.size() && corners[next_corner] <= t + 1e-6 * opt.tstep) ++next_corner;
        const double corner = next_corner < corners.size() ? corners[next_corner] : opt.tstop;
        double step = std::min(h, corner - t);
        if (corner - (t + step) < 0.01 * opt.tstep) step = corner - t;
        const bool lands_on_corner = t + step >= corner - 1e-6 * opt.tstep;

        const Method method = after_corner ? Method::BackwardEuler : Method::Trapezoidal;
        Eigen::VectorXd trial = x;
        auto res = mna.solve(trial, t + step, step, method, &caps);
        if (!res.converged) {
            h = step / 2;
            if (h < min_step)
                throw NonConvergence(res.iterations, mna.names()[static_cast<std::size_t>(res.worst)], t + step);
            continue;
        }
        x = trial;
        mna.advance_caps(caps, x, step, method);
        t = lands_on_corner ? corner : t + step;
        record(t);
        after_corner = lands_on_corner;
        h = std::min(opt.tstep, h * 2);
    }

    for (int i = 0; i < nodes; ++i)
        w.node_volts[mna.names()[static_cast<std::size_t>(i)]] = std::move(volts[static_cast<std::size_t>(i)]);
    return w;
}

}  // namespace cellforge
