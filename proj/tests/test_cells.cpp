#include <gtest/gtest.h>

#include "cellforge/cells.hpp"

using namespace cellforge;

namespace {

bool majority(bool a, bool b, bool c) { return (a && b) || (a && c) || (b && c); }

}  // namespace

TEST(Golden, FullAdderExamples) {
    EXPECT_EQ(golden_full_adder(1, 0, 1), (FullAdderBits{false, true}));
    EXPECT_EQ(golden_full_adder(0, 1, 1), (FullAdderBits{false, true}));
    EXPECT_EQ(golden_full_adder(0, 0, 1), (FullAdderBits{true, false}));
    EXPECT_EQ(golden_full_adder(0, 0, 0), (FullAdderBits{false, false}));
    EXPECT_EQ(golden_full_adder(1, 1, 1), (FullAdderBits{true, true}));
}

// H'A + H Cin is the majority function, H xor Cin is parity.
TEST(Golden, EquationsMatchTextbookAdder) {
    for (int row = 0; row < 8; ++row) {
        bool a = row & 4, b = row & 2, c = row & 1;
        auto fa = golden_full_adder(a, b, c);
        EXPECT_EQ(fa.carry, majority(a, b, c)) << row;
        EXPECT_EQ(fa.sum, ((a + b + c) % 2) == 1) << row;
        EXPECT_EQ(int(fa.sum) + 2 * int(fa.carry), a + b + c) << row;
    }
}

TEST(Gdi, TableRowsAreTheMuxLaw) {
    struct Expect { std::string_view fn; bool (*f)(bool, bool, bool); };
    const Expect expect[] = {
        {"F1", [](bool a, bool b, bool) { return !a && b; }},
        {"F2", [](bool a, bool b, bool) { return !a || b; }},
        {"OR", [](bool a, bool b, bool) { return a || b; }},
        {"AND", [](bool a, bool b, bool) { return a && b; }},
        {"MUX", [](bool a, bool b, bool c) { return (!a && b) || (a && c); }},
    };
    const auto& table = gdi_function_table();
    ASSERT_EQ(table.size(), 5u);
    for (std::size_t i = 0; i < table.size(); ++i) {
        ASSERT_EQ(table[i].function, expect[i].fn);
        auto cell = gdi_cell(table[i].config);
        const auto& golden = cell.golden.at("out");
        const int arity = golden.arity;
        EXPECT_EQ(static_cast<std::size_t>(arity), cell.circuit.ports().inputs.size());
        for (std::size_t row = 0; row < golden.table.size(); ++row) {
            auto bits = TruthFunction::row_bits(arity, row);
            bool a = bits[0], b = arity > 1 ? bool(bits[1]) : false, c = arity > 2 ? bool(bits[2]) : false;
            EXPECT_EQ(golden(row), expect[i].f(a, b, c)) << expect[i].fn << " row " << row;
        }
    }
}

// Brute force over every configuration: golden = G.N + G'.P.
TEST(Gdi, EveryConfigurationFollowsMuxLaw) {
    using I = GdiInput;
    const I all[] = {I::A, I::B, I::C, I::Zero, I::One};
    int checked = 0;
    for (I g : all)
        for (I p : all)
            for (I n : all) {
                GdiConfig cfg{g, p, n};
                if (!cfg.has_variable()) {
                    EXPECT_THROW(gdi_cell(cfg), Error);
                    continue;
                }
                auto cell = gdi_cell(cfg);
                const auto& ins = cell.circuit.ports().inputs;
                const auto& fn = cell.golden.at("out");
                for (std::size_t row = 0; row < fn.table.size(); ++row) {
                    auto bits = TruthFunction::row_bits(fn.arity, row);
                    auto val = [&](I x) {
                        if (x == I::Zero) return false;
                        if (x == I::One) return true;
                        std::string net = x == I::A ? "a" : x == I::B ? "b" : "c";
                        for (std::size_t k = 0; k < ins.size(); ++k)
                            if (ins[k] == net) return bool(bits[k]);
                        ADD_FAILURE() << "missing input " << net;
                        return false;
                    };
                    EXPECT_EQ(fn(row), (val(g) && val(n)) || (!val(g) && val(p)));
                }
                ++checked;
            }
    EXPECT_EQ(checked, 125 - 8);
}

TEST(Gdi, TwoTransistorsWithBulksOnDiffusions) {
    auto cell = gdi_cell({GdiInput::A, GdiInput::B, GdiInput::C});
    ASSERT_EQ(cell.circuit.mosfets().size(), 2u);
    for (const auto& m : cell.circuit.mosfets()) {
        EXPECT_EQ(m.gate, "a");
        EXPECT_EQ(m.drain, "out");
        EXPECT_EQ(m.bulk, m.source);
        EXPECT_EQ(m.source, m.polarity == Polarity::PMOS ? "b" : "c");
    }
}

TEST(Cells, TransistorBudgets) {
    EXPECT_EQ(count_transistors(ptl_xor2().circuit), (TransistorCount{2, 2, 4}));
    EXPECT_EQ(count_transistors(proposed_gdi_adder().circuit), (TransistorCount{5, 5, 10}));
    EXPECT_EQ(count_transistors(proposed_ptl_gdi_adder().circuit), (TransistorCount{5, 5, 10}));
    EXPECT_EQ(count_transistors(cmos28_reference_adder().circuit).total, 28);
    for (const auto& name : builtin_cell_names()) {
        auto cell = make_cell(name);
        ASSERT_TRUE(cell->declared_count);
        EXPECT_EQ(count_transistors(cell->circuit), *cell->declared_count) << name;
    }
}

TEST(Cells, CarryIsGdiOnHWithADiffusionAndCinDiffusion) {
    for (const auto& cell : {proposed_gdi_adder(), proposed_ptl_gdi_adder()}) {
        int found = 0;
        for (const auto& m : cell.circuit.mosfets()) {
            if (m.drain != "carry") continue;
            EXPECT_EQ(m.gate, "h");
            EXPECT_EQ(m.source, m.polarity == Polarity::PMOS ? "a" : "cin");
            ++found;
        }
        EXPECT_EQ(found, 2) << cell.name;
    }
}

TEST(Cells, AdderGoldenTables) {
    for (const auto& cell : {proposed_gdi_adder(), proposed_ptl_gdi_adder(), cmos28_reference_adder()}) {
        EXPECT_EQ(cell.circuit.ports().inputs, (std::vector<std::string>{"a", "b", "cin"}));
        const auto& sum = cell.golden.at("sum");
        const auto& carry = cell.golden.at("carry");
        EXPECT_EQ(sum(0b101), false);
        EXPECT_EQ(carry(0b101), true);
        EXPECT_EQ(sum(0b111), true);
        EXPECT_EQ(carry(0b111), true);
        for (std::size_t row = 0; row < 8; ++row)
            EXPECT_EQ(carry(row), majority(row & 4, row & 2, row & 1));
    }
    auto x = ptl_xor2();
    EXPECT_EQ(x.golden.at("h")(0b10), true);
    EXPECT_EQ(x.golden.at("h")(0b11), false);
}

TEST(Cells, LookupByName) {
    EXPECT_TRUE(make_cell("proposed_gdi"));
    EXPECT_TRUE(make_cell("GDI-MUX"));
    EXPECT_FALSE(make_cell("radhakrishnan"));
    auto wide = make_cell("cmos28", CellOptions{8e-6, 3e-6, 0.35e-6});
    for (const auto& m : wide->circuit.mosfets()) EXPECT_DOUBLE_EQ(m.length, 0.35e-6);
}
