#pragma once

// Circuit data model and the SPICE-subset netlist reader/writer.
//
//   M<name> <drain> <gate> <source> <bulk> <NMOS|PMOS> W=<val> L=<val>
//   C<name> <n+> <n-> <val>
//   V<name> <n+> <n-> DC <val> | PULSE(<v1> <v2> <td> <tr> <tf> <pw> <per>)
//   .ports in=<a,b,...> out=<x,...> vdd=<net>
//   .end
//
// '*' starts a comment line, ';' a trailing comment, '+' continues the
// previous line. Keywords are case-insensitive; net names are not.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cellforge/error.hpp"
#include "cellforge/units.hpp"

namespace cellforge {

inline constexpr std::string_view kGround = "0";
inline constexpr double kMinFeatureWidth = 2e-6;

enum class Polarity { NMOS, PMOS };

inline std::string_view to_string(Polarity p) { return p == Polarity::NMOS ? "NMOS" : "PMOS"; }

struct Mosfet {
    std::string name;
    Polarity polarity = Polarity::NMOS;
    std::string drain, gate, source, bulk;
    double width = 0.0;   // m
    double length = 0.0;  // m

    bool operator==(const Mosfet&) const = default;
};

struct Capacitor {
    std::string name;
    std::string positive, negative;
    double value = 0.0;  // F

    bool operator==(const Capacitor&) const = default;
};

struct DcWave {
    double volts = 0.0;
    bool operator==(const DcWave&) const = default;
};

struct PulseWave {
    double v_low = 0.0, v_high = 0.0;
    double delay = 0.0, rise = 0.0, fall = 0.0, width = 0.0, period = 0.0;

    bool operator==(const PulseWave&) const = default;

    double value_at(double t) const {
        if (t < delay) return v_low;
        double tt = std::fmod(t - delay, period);
        if (tt < rise) return v_low + (v_high - v_low) * tt / rise;
        if (tt < rise + width) return v_high;
        if (tt < rise + width + fall) return v_high + (v_low - v_high) * (tt - rise - width) / fall;
        return v_low;
    }

    /// Corner times of the waveform inside [0, tstop].
    std::vector<double> breakpoints(double tstop) const {
        std::vector<double> out;
        for (double base = delay; base <= tstop; base += period) {
            for (double off : {0.0, rise, rise + width, rise + width + fall})
                if (base + off <= tstop) out.push_back(base + off);
        }
        return out;
    }
};

struct IndependentSource {
    std::string name;
    std::string positive, negative;
    std::variant<DcWave, PulseWave> wave;

    bool operator==(const IndependentSource&) const = default;

    double value_at(double t) const {
        if (const auto* dc = std::get_if<DcWave>(&wave)) return dc->volts;
        return std::get<PulseWave>(wave).value_at(t);
    }
};

struct Ports {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string vdd;

    bool operator==(const Ports&) const = default;
    bool empty() const { return inputs.empty() && outputs.empty() && vdd.empty(); }
};

/// A flat circuit over named nets. Net "0" is ground and always present.
class Circuit {
public:
    Circuit() { nets_.insert(std::string(kGround)); }

    void add(Mosfet m) {
        if (!(m.width > 0) || !(m.length > 0))
            throw CircuitError("transistor '" + m.name + "' needs positive W and L");
        claim_name(m.name);
        for (const auto* n : {&m.drain, &m.gate, &m.source, &m.bulk}) add_net(*n);
        mosfets_.push_back(std::move(m));
    }

    void add(Capacitor c) {
        if (!(c.value > 0)) throw CircuitError("capacitor '" + c.name + "' needs a positive value");
        claim_name(c.name);
        add_net(c.positive);
        add_net(c.negative);
        capacitors_.push_back(std::move(c));
    }

    void add(IndependentSource s) {
        if (const auto* p = std::get_if<PulseWave>(&s.wave)) {
            if (!(p->rise > 0) || !(p->fall > 0))
                throw CircuitError("source '" + s.name + "': PULSE rise and fall must be positive");
            if (!(p->period > p->width + p->rise + p->fall))
                throw CircuitError("source '" + s.name + "': PULSE period must exceed width + rise + fall");
        }
        claim_name(s.name);
        add_net(s.positive);
        add_net(s.negative);
        sources_.push_back(std::move(s));
    }

    void set_ports(Ports p) {
        std::set<std::string> seen;
        auto check = [&](const std::string& n) {
            if (n.empty()) return;
            if (!seen.insert(n).second) throw CircuitError("port '" + n + "' declared twice");
            add_net(n);
        };
        for (const auto& n : p.inputs) check(n);
        for (const auto& n : p.outputs) check(n);
        check(p.vdd);
        ports_ = std::move(p);
    }

    const std::vector<Mosfet>& mosfets() const { return mosfets_; }
    const std::vector<Capacitor>& capacitors() const { return capacitors_; }
    const std::vector<IndependentSource>& sources() const { return sources_; }
    const Ports& ports() const { return ports_; }
    const std::set<std::string>& nets() const { return nets_; }

    bool has_net(std::string_view n) const { return nets_.find(std::string(n)) != nets_.end(); }
    std::size_t device_count() const { return mosfets_.size() + capacitors_.size() + sources_.size(); }

    const Mosfet* find_mosfet(std::string_view name) const {
        for (const auto& m : mosfets_)
            if (m.name == name) return &m;
        return nullptr;
    }

    void set_width(std::string_view name, double w) {
        if (!(w > 0)) throw CircuitError("width must be positive");
        for (auto& m : mosfets_)
            if (m.name == name) {
                m.width = w;
                return;
            }
        throw CircuitError("no transistor named '" + std::string(name) + "'");
    }

    bool operator==(const Circuit& o) const {
        return mosfets_ == o.mosfets_ && capacitors_ == o.capacitors_ && sources_ == o.sources_ &&
               ports_ == o.ports_ && nets_ == o.nets_;
    }

private:
    void claim_name(const std::string& name) {
        if (name.empty()) throw CircuitError("device without a name");
        if (!names_.insert(name).second) throw CircuitError("duplicate device name '" + name + "'");
    }
    void add_net(const std::string& n) {
        if (n.empty()) throw CircuitError("empty net name");
        nets_.insert(n);
    }

    std::vector<Mosfet> mosfets_;
    std::vector<Capacitor> capacitors_;
    std::vector<IndependentSource> sources_;
    Ports ports_;
    std::set<std::string> nets_;
    std::set<std::string> names_;
};

struct TransistorCount {
    int nmos = 0;
    int pmos = 0;
    int total = 0;
    bool operator==(const TransistorCount&) const = default;
};

inline TransistorCount count_transistors(const Circuit& c) {
    TransistorCount t;
    for (const auto& m : c.mosfets()) (m.polarity == Polarity::NMOS ? t.nmos : t.pmos)++;
    t.total = t.nmos + t.pmos;
    return t;
}

/// Checks the soft invariants that construction does not enforce.
/// Returns human-readable problems; empty means valid.
inline std::vector<std::string> validate(const Circuit& c, double min_width = kMinFeatureWidth) {
    std::vector<std::string> problems;
    for (const auto& m : c.mosfets())
        if (m.width < min_width * (1 - 1e-9))
            problems.push_back("transistor '" + m.name + "' width " + format_number(m.width) +
                               " is below the minimum feature width " + format_number(min_width));
    if (c.sources().empty() && c.ports().empty()) problems.push_back("circuit has neither sources nor ports");
    return problems;
}

struct Diagnostic {
    std::size_t line = 0;
    std::string message;
};

struct ParseResult {
    Circuit circuit;
    std::vector<Diagnostic> warnings;
};

namespace detail {

struct Token {
    std::string text;
    std::size_t column;  // 1-based
};

struct LogicalLine {
    std::string text;
    std::size_t line;  // first physical line, 1-based
};

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::vector<LogicalLine> logical_lines(std::string_view text) {
    std::vector<LogicalLine> out;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        std::string line(raw);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto sc = line.find(';'); sc != std::string::npos) line.erase(sc);
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '*') continue;
        if (line[first] == '+') {
            if (out.empty()) throw ParseError("continuation line without a preceding line", lineno, first + 1);
            out.back().text += " " + line.substr(first + 1);
            continue;
        }
        out.push_back({line, lineno});
    }
    return out;
}

inline std::vector<Token> tokenize(const std::string& s, std::string_view separators = " \t") {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && separators.find(s[i]) != std::string_view::npos) ++i;
        if (i >= s.size()) break;
        std::size_t start = i;
        while (i < s.size() && separators.find(s[i]) == std::string_view::npos) ++i;
        toks.push_back({s.substr(start, i - start), start + 1});
    }
    return toks;
}

inline double number_or_throw(const Token& t, std::size_t line) {
    auto v = parse_number(t.text);
    if (!v) throw ParseError("invalid number '" + t.text + "'", line, t.column);
    return *v;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        auto comma = s.find(',', pos);
        auto item = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Parses netlist text; warnings (e.g. nets touched by a single terminal) are
/// returned alongside the circuit.
inline ParseResult parse_netlist_with_diagnostics(std::string_view text) {
    using detail::Token;
    ParseResult result;
    Circuit& c = result.circuit;
    std::map<std::string, int> refs;
    std::map<std::string, std::size_t> first_line;
    auto ref = [&](const std::string& n, std::size_t line) {
        refs[n]++;
        first_line.emplace(n, line);
    };

    auto wrap = [](std::size_t line, std::size_t col, auto&& fn) {
        try {
            fn();
        } catch (const CircuitError& e) {
            throw ParseError(e.what(), line, col);
        }
    };

    for (const auto& ll : detail::logical_lines(text)) {
        const std::size_t line = ll.line;
        auto toks = detail::tokenize(ll.text);
        const Token& head = toks.front();
        const char letter = static_cast<char>(std::tolower(static_cast<unsigned char>(head.text[0])));

        if (letter == '.') {
            std::string directive = detail::lower(head.text);
            if (directive == ".end") break;
            if (directive == ".ports") {
                Ports p;
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    auto eq = toks[i].text.find('=');
                    if (eq == std::string::npos)
                        throw ParseError("expected key=value in .ports", line, toks[i].column);
                    std::string key = detail::lower(toks[i].text.substr(0, eq));
                    std::string val = toks[i].text.substr(eq + 1);
                    if (key == "in") {
                        p.inputs = detail::split_list(val);
                    } else if (key == "out") {
                        p.outputs = detail::split_list(val);
                    } else if (key == "vdd") {
                        p.vdd = val;
                    } else {
                        throw ParseError("unknown .ports key '" + key + "'", line, toks[i].column);
                    }
                }
                wrap(line, head.column, [&] { c.set_ports(p); });
                for (const auto& n : p.inputs) ref(n, line);
                for (const auto& n : p.outputs) ref(n, line);
                if (!p.vdd.empty()) ref(p.vdd, line);
                continue;
            }
            result.warnings.push_back({line, "ignoring unsupported directive '" + head.text + "'"});
            continue;
        }

        switch (letter) {
        case 'm': {
            if (toks.size() < 6) throw ParseError("transistor needs drain gate source bulk and model", line, head.column);
            Mosfet m;
            m.name = head.text;
            m.drain = toks[1].text;
            m.gate = toks[2].text;
            m.source = toks[3].text;
            m.bulk = toks[4].text;
            std::string model = detail::lower(toks[5].text);
            if (model == "nmos") {
                m.polarity = Polarity::NMOS;
            } else if (model == "pmos") {
                m.polarity = Polarity::PMOS;
            } else {
                throw ParseError("expected NMOS or PMOS, got '" + toks[5].text + "'", line, toks[5].column);
            }
            bool have_w = false, have_l = false;
            for (std::size_t i = 6; i < toks.size(); ++i) {
                auto eq = toks[i].text.find('=');
                if (eq == std::string::npos) throw ParseError("expected W=<val> or L=<val>", line, toks[i].column);
                std::string key = detail::lower(toks[i].text.substr(0, eq));
                Token val{toks[i].text.substr(eq + 1), toks[i].column + eq + 1};
                if (key == "w") {
                    m.width = detail::number_or_throw(val, line);
                    have_w = true;
                } else if (key == "l") {
                    m.length = detail::number_or_throw(val, line);
                    have_l = true;
                } else {
                    throw ParseError("unknown transistor parameter '" + key + "'", line, toks[i].column);
                }
            }
            if (!have_w || !have_l) throw ParseError("transistor needs both W= and L=", line, head.column);
            for (const auto* n : {&m.drain, &m.gate, &m.source, &m.bulk}) ref(*n, line);
            if (m.width < kMinFeatureWidth * (1 - 1e-9))
                result.warnings.push_back({line, "transistor '" + m.name + "' is narrower than the 2u minimum feature"});
            wrap(line, head.column, [&] { c.add(std::move(m)); });
            break;
        }
        case 'c': {
            if (toks.size() != 4) throw ParseError("capacitor needs two nets and a value", line, head.column);
            Capacitor cap{head.text, toks[1].text, toks[2].text, detail::number_or_throw(toks[3], line)};
            ref(cap.positive, line);
            ref(cap.negative, line);
            wrap(line, head.column, [&] { c.add(std::move(cap)); });
            break;
        }
        case 'v': {
            auto vt = detail::tokenize(ll.text, " \t(),");
            if (vt.size() < 4) throw ParseError("source needs two nets and a value", line, head.column);
            IndependentSource s;
            s.name = head.text;
            s.positive = vt[1].text;
            s.negative = vt[2].text;
            std::string kind = detail::lower(vt[3].text);
            if (kind == "dc") {
                if (vt.size() != 5) throw ParseError("DC source needs exactly one value", line, vt[3].column);
                s.wave = DcWave{detail::number_or_throw(vt[4], line)};
            } else if (kind == "pulse") {
                if (vt.size() != 11) throw ParseError("PULSE needs 7 values", line, vt[3].column);
                double f[7];
                for (int i = 0; i < 7; ++i) f[i] = detail::number_or_throw(vt[4 + i], line);
                s.wave = PulseWave{f[0], f[1], f[2], f[3], f[4], f[5], f[6]};
            } else if (vt.size() == 4) {
                s.wave = DcWave{detail::number_or_throw(vt[3], line)};
            } else {
                throw ParseError("expected DC or PULSE, got '" + vt[3].text + "'", line, vt[3].column);
            }
            ref(s.positive, line);
            ref(s.negative, line);
            wrap(line, head.column, [&] { c.add(std::move(s)); });
            break;
        }
        default:
            throw ParseError("unknown device letter '" + std::string(1, head.text[0]) + "'", line, head.column);
        }
    }

    if (c.device_count() == 0) throw ParseError("no devices");
    for (const auto& [net, count] : refs)
        if (count == 1 && net != kGround)
            result.warnings.push_back({first_line[net], "net '" + net + "' is referenced only once"});
    return result;
}

inline Circuit parse_netlist(std::string_view text) { return parse_netlist_with_diagnostics(text).circuit; }

inline std::string serialize(const Circuit& c, std::string_view title = {}) {
    std::ostringstream os;
    if (!title.empty()) os << "* " << title << "\n";
    for (const auto& m : c.mosfets())
        os << m.name << ' ' << m.drain << ' ' << m.gate << ' ' << m.source << ' ' << m.bulk << ' '
           << to_string(m.polarity) << " W=" << format_number(m.width) << " L=" << format_number(m.length) << '\n';
    for (const auto& cap : c.capacitors())
        os << cap.name << ' ' << cap.positive << ' ' << cap.negative << ' ' << format_number(cap.value) << '\n';
    for (const auto& s : c.sources()) {
        os << s.name << ' ' << s.positive << ' ' << s.negative << ' ';
        if (const auto* dc = std::get_if<DcWave>(&s.wave)) {
            os << "DC " << format_number(dc->volts);
        } else {
            const auto& p = std::get<PulseWave>(s.wave);
            os << "PULSE(" << format_number(p.v_low) << ' ' << format_number(p.v_high) << ' '
               << format_number(p.delay) << ' ' << format_number(p.rise) << ' ' << format_number(p.fall) << ' '
               << format_number(p.width) << ' ' << format_number(p.period) << ')';
        }
        os << '\n';
    }
    const auto& p = c.ports();
    if (!p.empty()) {
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& n : v) s += (s.empty() ? "" : ",") + n;
            return s;
        };
        os << ".ports";
        if (!p.inputs.empty()) os << " in=" << join(p.inputs);
        if (!p.outputs.empty()) os << " out=" << join(p.outputs);
        if (!p.vdd.empty()) os << " vdd=" << p.vdd;
        os << '\n';
    }
    os << ".end\n";
    return os.str();
}

/// Copy of `c` with every net renamed through `rename` (nets missing from the
/// map keep their name). Ground must map to ground.
inline Circuit rename_nets(const Circuit& c, const std::map<std::string, std::string>& rename) {
    auto map = [&](const std::string& n) {
        auto it = rename.find(n);
        return it == rename.end() ? n : it->second;
    };
    Circuit out;
    for (auto m : c.mosfets()) {
        m.drain = map(m.drain);
        m.gate = map(m.gate);
        m.source = map(m.source);
        m.bulk = map(m.bulk);
        out.add(std::move(m));
    }
    for (auto cap : c.capacitors()) {
        cap.positive = map(cap.positive);
        cap.negative = map(cap.negative);
        out.add(std::move(cap));
    }
    for (auto s : c.sources()) {
        s.positive = map(s.positive);
        s.negative = map(s.negative);
        out.add(std::move(s));
    }
    Ports p = c.ports();
    for (auto& n : p.inputs) n = map(n);
    for (auto& n : p.outputs) n = map(n);
    if (!p.vdd.empty()) p.vdd = map(p.vdd);
    out.set_ports(std::move(p));
    return out;
}

}  // namespace cellforge
