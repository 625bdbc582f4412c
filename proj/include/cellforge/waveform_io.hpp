#pragma once

// Waveform export: CSV (one row per accepted step) and VCD.

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cellforge/error.hpp"
#include "cellforge/transient.hpp"

namespace cellforge {

namespace detail {

inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<std::string> select_nets(const Waveform& w, const std::vector<std::string>& nets) {
    if (!nets.empty()) {
        for (const auto& n : nets) (void)w.volts(n);
        return nets;
    }
    std::vector<std::string> all;
    for (const auto& [n, v] : w.node_volts) all.push_back(n);
    return all;
}

// VCD identifier codes: base-94 over the printable range.
inline std::string vcd_id(std::size_t k) {
    std::string s;
    do {
        s += static_cast<char>('!' + k % 94);
        k /= 94;
    } while (k);
    return s;
}

}  // namespace detail

/// Header `time,<net>,...,idd`; SI units throughout. All nets when `nets` is empty.
inline void write_csv(std::ostream& os, const Waveform& w, const std::vector<std::string>& nets = {}) {
    const auto cols = detail::select_nets(w, nets);
    os << "time";
    for (const auto& n : cols) os << ',' << n;
    os << ",idd\n";
    std::vector<const std::vector<double>*> data;
    for (const auto& n : cols) data.push_back(&w.volts(n));
    for (std::size_t i = 0; i < w.times.size(); ++i) {
        os << detail::csv_number(w.times[i]);
        for (const auto* d : data) os << ',' << detail::csv_number((*d)[i]);
        os << ',' << detail::csv_number(w.supply_current[i]) << '\n';
    }
}

inline Waveform read_csv(std::istream& is) {
    Waveform w;
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty waveform file", 1, 1);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.front() != "time" || header.back() != "idd")
        throw ParseError("waveform header must be time,<net>,...,idd", 1, 1);
    std::vector<std::vector<double>> cols(header.size());
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t k = 0;
        while (std::getline(ss, cell, ',')) {
            if (k >= cols.size()) throw ParseError("too many columns", lineno, 1);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') throw ParseError("bad number '" + cell + "'", lineno, 1);
            cols[k++].push_back(v);
        }
        if (k != cols.size()) throw ParseError("too few columns", lineno, 1);
    }
    w.times = std::move(cols.front());
    w.supply_current = std::move(cols.back());
    for (std::size_t k = 1; k + 1 < header.size(); ++k) w.node_volts[header[k]] = std::move(cols[k]);
    return w;
}

/// VCD with a 1-bit logic variable per net (Vdd/2 threshold) and a real
/// variable for each of `analog_nets`. Time unit 1 fs.
inline void write_vcd(std::ostream& os, const Waveform& w, double vdd, const std::vector<std::string>& logic_nets = {},
                      const std::vector<std::string>& analog_nets = {}) {
    const auto logic = detail::select_nets(w, logic_nets);
    for (const auto& n : analog_nets) (void)w.volts(n);

    os << "$version cellforge $end\n$timescale 1 fs $end\n";
    os << "$scope module logic $end\n";
    std::size_t id = 0;
    for (const auto& n : logic) os << "$var wire 1 " << detail::vcd_id(id++) << ' ' << n << " $end\n";
    os << "$upscope $end\n$scope module analog $end\n";
    for (const auto& n : analog_nets) os << "$var real 64 " << detail::vcd_id(id++) << ' ' << n << " $end\n";
    os << "$upscope $end\n$enddefinitions $end\n";

    std::vector<int> last_bit(logic.size(), -1);
    std::vector<double> last_real(analog_nets.size(), std::nan(""));
    long long last_time = -1;
    for (std::size_t i = 0; i < w.times.size(); ++i) {
        std::ostringstream changes;
        for (std::size_t k = 0; k < logic.size(); ++k) {
            const int bit = w.volts(logic[k])[i] >= vdd / 2 ? 1 : 0;
            if (bit != last_bit[k]) {
                changes << bit << detail::vcd_id(k) << '\n';
                last_bit[k] = bit;
            }
        }
        for (std::size_t k = 0; k < analog_nets.size(); ++k) {
            const double v = w.volts(analog_nets[k])[i];
            if (!(v == last_real[k])) {
                char buf[40];
                std::snprintf(buf, sizeof buf, "r%.9g ", v);
                changes << buf << detail::vcd_id(logic.size() + k) << '\n';
                last_real[k] = v;
            }
        }
        const std::string text = changes.str();
        if (text.empty()) continue;
        const long long t = std::llround(w.times[i] * 1e15);
        if (t != last_time) {
            os << '#' << t << '\n';
            last_time = t;
        }
        os << text;
    }
}

}  // namespace cellforge
