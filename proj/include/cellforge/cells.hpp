#pragma once

// Generators for GDI / PTL primitive cells and the two 10-transistor hybrid
// full adders, plus the golden Boolean references they are checked against.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cellforge/netlist.hpp"

namespace cellforge {

/// Total truth table. Row index packs the inputs with the first input as the
/// most significant bit, so (A,B,Cin) = 101 is row 5.
struct TruthFunction {
    int arity = 0;
    std::vector<bool> table;

    TruthFunction() = default;
    TruthFunction(int n, std::vector<bool> t) : arity(n), table(std::move(t)) {
        if (table.size() != (std::size_t{1} << arity)) throw Error("truth table is not total");
    }

    template <class F>
    static TruthFunction from(int n, F&& f) {
        std::vector<bool> t(std::size_t{1} << n);
        for (std::size_t row = 0; row < t.size(); ++row) t[row] = f(row_bits(n, row));
        return TruthFunction(n, std::move(t));
    }

    static std::vector<bool> row_bits(int n, std::size_t row) {
        std::vector<bool> bits(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (row >> (n - 1 - i)) & 1U;
        return bits;
    }

    bool operator()(std::size_t row) const { return table.at(row); }
    bool operator==(const TruthFunction&) const = default;
};

struct FullAdderBits {
    bool sum;
    bool carry;
    bool operator==(const FullAdderBits&) const = default;
};

/// SUM = H xor Cin, CARRY = H'A + H Cin with H = A xor B.
constexpr FullAdderBits golden_full_adder(bool a, bool b, bool cin) {
    const bool h = a != b;
    return {h != cin, h ? cin : a};
}

struct CellOptions {
    double wp = 4e-6;
    double wn = 2e-6;
    double length = 0.18e-6;
};

struct CellSpec {
    std::string name;
    Circuit circuit;
    std::map<std::string, TruthFunction> golden;  // keyed by output port
    std::optional<TransistorCount> declared_count;
};

enum class GdiInput { A, B, C, Zero, One };

/// Gate-diffusion-input cell: out = G ? N : P.
struct GdiConfig {
    GdiInput g = GdiInput::A;
    GdiInput p = GdiInput::B;
    GdiInput n = GdiInput::C;

    bool has_variable() const {
        auto var = [](GdiInput x) { return x != GdiInput::Zero && x != GdiInput::One; };
        return var(g) || var(p) || var(n);
    }
};

namespace detail {

inline std::string gdi_net(GdiInput x) {
    switch (x) {
    case GdiInput::A: return "a";
    case GdiInput::B: return "b";
    case GdiInput::C: return "c";
    case GdiInput::Zero: return std::string(kGround);
    case GdiInput::One: return "vdd";
    }
    return {};
}

class CellBuilder {
public:
    explicit CellBuilder(const CellOptions& o) : opt_(o) {}

    void nmos(std::string name, std::string d, std::string g, std::string s, std::string b) {
        c_.add(Mosfet{std::move(name), Polarity::NMOS, std::move(d), std::move(g), std::move(s), std::move(b),
                      opt_.wn, opt_.length});
    }
    void pmos(std::string name, std::string d, std::string g, std::string s, std::string b) {
        c_.add(Mosfet{std::move(name), Polarity::PMOS, std::move(d), std::move(g), std::move(s), std::move(b),
                      opt_.wp, opt_.length});
    }
    // Common-gate, common-drain pair with P/N diffusion inputs; bulks follow the diffusions.
    void gdi(const std::string& tag, const std::string& out, const std::string& g, const std::string& p,
             const std::string& n) {
        pmos("MP" + tag, out, g, p, p);
        nmos("MN" + tag, out, g, n, n);
    }
    void inverter(const std::string& tag, const std::string& out, const std::string& in) {
        gdi(tag, out, in, "vdd", std::string(kGround));
    }
    Circuit take(Ports p) {
        c_.set_ports(std::move(p));
        return std::move(c_);
    }

private:
    CellOptions opt_;
    Circuit c_;
};

inline std::map<std::string, TruthFunction> full_adder_golden() {
    return {
        {"sum", TruthFunction::from(3, [](const auto& x) { return golden_full_adder(x[0], x[1], x[2]).sum; })},
        {"carry", TruthFunction::from(3, [](const auto& x) { return golden_full_adder(x[0], x[1], x[2]).carry; })},
    };
}

inline const Ports& full_adder_ports() {
    static const Ports p{{"a", "b", "cin"}, {"sum", "carry"}, "vdd"};
    return p;
}

}  // namespace detail

inline CellSpec gdi_cell(const GdiConfig& cfg, const CellOptions& opt = {}) {
    if (!cfg.has_variable()) throw Error("GDI configuration needs at least one variable input");
    std::vector<GdiInput> vars;
    for (GdiInput v : {GdiInput::A, GdiInput::B, GdiInput::C})
        if (cfg.g == v || cfg.p == v || cfg.n == v) vars.push_back(v);

    detail::CellBuilder b(opt);
    b.gdi("1", "out", detail::gdi_net(cfg.g), detail::gdi_net(cfg.p), detail::gdi_net(cfg.n));
    Ports ports;
    for (GdiInput v : vars) ports.inputs.push_back(detail::gdi_net(v));
    ports.outputs = {"out"};
    ports.vdd = "vdd";

    const int arity = static_cast<int>(vars.size());
    auto value = [&](GdiInput x, const std::vector<bool>& bits) {
        if (x == GdiInput::Zero) return false;
        if (x == GdiInput::One) return true;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == x) return static_cast<bool>(bits[i]);
        return false;
    };
    auto golden = TruthFunction::from(arity, [&](const std::vector<bool>& bits) {
        return value(cfg.g, bits) ? value(cfg.n, bits) : value(cfg.p, bits);
    });
    return {"gdi", b.take(std::move(ports)), {{"out", std::move(golden)}}, TransistorCount{1, 1, 2}};
}

/// Four-transistor pass-transistor XOR: two PMOS pass A/B crosswise, a
/// series NMOS pair pulls down when both inputs are high.
inline CellSpec ptl_xor2(const CellOptions& opt = {}) {
    detail::CellBuilder b(opt);
    const std::string gnd(kGround);
    b.pmos("MP1", "h", "b", "a", "vdd");
    b.pmos("MP2", "h", "a", "b", "vdd");
    b.nmos("MN1", "h", "a", "n1", gnd);
    b.nmos("MN2", "n1", "b", gnd, gnd);
    auto golden = TruthFunction::from(2, [](const auto& x) { return x[0] != x[1]; });
    return {"ptl-xor2", b.take(Ports{{"a", "b"}, {"h"}, "vdd"}), {{"h", std::move(golden)}}, TransistorCount{2, 2, 4}};
}

/// Hybrid adder with a pass-transistor SUM path and a GDI CARRY cell.
///
/// H' comes from a PTL XNOR (NMOS pass pair, series PMOS pull-up), an
/// inverter restores full-swing H, and a Cin-controlled pass pair selects
/// H or H' for SUM: eight transistors. CARRY is one GDI cell with gate H,
/// PMOS diffusion A and NMOS diffusion Cin.
inline CellSpec proposed_ptl_gdi_adder(const CellOptions& opt = {}) {
    detail::CellBuilder b(opt);
    const std::string gnd(kGround);
    b.nmos("MN1", "hb", "b", "a", gnd);
    b.nmos("MN2", "hb", "a", "b", gnd);
    b.pmos("MP1", "p1", "a", "vdd", "vdd");
    b.pmos("MP2", "hb", "b", "p1", "vdd");
    b.pmos("MP3", "h", "hb", "vdd", "vdd");
    b.nmos("MN3", "h", "hb", gnd, gnd);
    b.nmos("MN4", "sum", "cin", "hb", gnd);
    b.pmos("MP4", "sum", "cin", "h", "vdd");
    b.gdi("5", "carry", "h", "a", "cin");
    return {"proposed-ptl-gdi", b.take(detail::full_adder_ports()), detail::full_adder_golden(),
            TransistorCount{5, 5, 10}};
}

/// All-GDI hybrid adder. H' = B ? A : A' (GDI mux fed by an A inverter),
/// H = inverter(H'), SUM = Cin ? H' : H, CARRY = H ? Cin : A.
inline CellSpec proposed_gdi_adder(const CellOptions& opt = {}) {
    detail::CellBuilder b(opt);
    b.inverter("1", "an", "a");
    b.gdi("2", "hb", "b", "an", "a");
    b.inverter("3", "h", "hb");
    b.gdi("4", "sum", "cin", "h", "hb");
    b.gdi("5", "carry", "h", "a", "cin");
    return {"proposed-gdi", b.take(detail::full_adder_ports()), detail::full_adder_golden(), TransistorCount{5, 5, 10}};
}

/// Static complementary mirror adder: 24 transistors computing Cout' and
/// Sum', plus two output inverters.
inline CellSpec cmos28_reference_adder(const CellOptions& opt = {}) {
    detail::CellBuilder b(opt);
    const std::string gnd(kGround);
    // Cout' pull-down: A.B + Cin.(A + B)
    b.nmos("MN1", "cob", "a", "n1", gnd);
    b.nmos("MN2", "n1", "b", gnd, gnd);
    b.nmos("MN3", "cob", "cin", "n2", gnd);
    b.nmos("MN4", "n2", "a", gnd, gnd);
    b.nmos("MN5", "n2", "b", gnd, gnd);
    // mirrored pull-up
    b.pmos("MP1", "p1", "a", "vdd", "vdd");
    b.pmos("MP2", "p1", "b", "vdd", "vdd");
    b.pmos("MP3", "cob", "cin", "p1", "vdd");
    b.pmos("MP4", "p2", "a", "vdd", "vdd");
    b.pmos("MP5", "cob", "b", "p2", "vdd");
    // Sum' pull-down: Cout'.(A + B + Cin) + A.B.Cin
    b.nmos("MN6", "sb", "cob", "n3", gnd);
    b.nmos("MN7", "n3", "a", gnd, gnd);
    b.nmos("MN8", "n3", "b", gnd, gnd);
    b.nmos("MN9", "n3", "cin", gnd, gnd);
    b.nmos("MN10", "sb", "a", "n4", gnd);
    b.nmos("MN11", "n4", "b", "n5", gnd);
    b.nmos("MN12", "n5", "cin", gnd, gnd);
    b.pmos("MP6", "p3", "a", "vdd", "vdd");
    b.pmos("MP7", "p3", "b", "vdd", "vdd");
    b.pmos("MP8", "p3", "cin", "vdd", "vdd");
    b.pmos("MP9", "sb", "cob", "p3", "vdd");
    b.pmos("MP10", "p4", "a", "vdd", "vdd");
    b.pmos("MP11", "p5", "b", "p4", "vdd");
    b.pmos("MP12", "sb", "cin", "p5", "vdd");
    b.inverter("13", "sum", "sb");
    b.inverter("14", "carry", "cob");
    return {"cmos28", b.take(detail::full_adder_ports()), detail::full_adder_golden(), TransistorCount{14, 14, 28}};
}

/// The five input configurations of the classic GDI function table.
struct GdiTableRow {
    std::string_view function;
    GdiConfig config;
};

inline const std::vector<GdiTableRow>& gdi_function_table() {
    using I = GdiInput;
    static const std::vector<GdiTableRow> rows{
        {"F1", {I::A, I::B, I::Zero}},   // A'B
        {"F2", {I::A, I::One, I::B}},    // A' + B
        {"OR", {I::A, I::B, I::One}},    // A + B
        {"AND", {I::A, I::Zero, I::B}},  // AB
        {"MUX", {I::A, I::B, I::C}},     // A'B + AC
    };
    return rows;
}

inline std::vector<std::string> builtin_cell_names() {
    return {"proposed-gdi", "proposed-ptl-gdi", "cmos28", "ptl-xor2",
            "gdi-f1",       "gdi-f2",           "gdi-or", "gdi-and", "gdi-mux"};
}

/// Looks up a generator by CLI name; underscores are accepted for hyphens.
inline std::optional<CellSpec> make_cell(std::string_view name, const CellOptions& opt = {}) {
    std::string n(name);
    for (auto& ch : n) ch = ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (n == "proposed-gdi") return proposed_gdi_adder(opt);
    if (n == "proposed-ptl-gdi") return proposed_ptl_gdi_adder(opt);
    if (n == "cmos28") return cmos28_reference_adder(opt);
    if (n == "ptl-xor2") return ptl_xor2(opt);
    for (const auto& row : gdi_function_table()) {
        std::string fname = "gdi-" + detail::lower(row.function);
        if (n == fname) {
            auto cell = gdi_cell(row.config, opt);
            cell.name = fname;
            return cell;
        }
    }
    return std::nullopt;
}

/// Wraps an arbitrary netlist as a cell. A 3-in/2-out port list gets the
/// full-adder golden functions; anything else carries no golden reference.
inline CellSpec cell_from_circuit(std::string name, Circuit c) {
    CellSpec spec{std::move(name), std::move(c), {}, std::nullopt};
    const auto& p = spec.circuit.ports();
    if (p.inputs.size() == 3 && p.outputs.size() == 2) {
        auto g = detail::full_adder_golden();
        spec.golden[p.outputs[0]] = g["sum"];
        spec.golden[p.outputs[1]] = g["carry"];
    }
    return spec;
}

}  // namespace cellforge
