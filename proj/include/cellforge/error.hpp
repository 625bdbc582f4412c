#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellforge {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed netlist or config text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line = 0, std::size_t column = 0)
        : Error(format(msg, line, column)), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
        if (line == 0) return msg;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
    }
    std::size_t line_;
    std::size_t column_;
};

/// Structurally invalid circuit (dangling terminal, bad device value, ...).
class CircuitError : public Error {
public:
    using Error::Error;
};

/// Newton iteration did not settle.
class NonConvergence : public Error {
public:
    NonConvergence(int iterations, std::string worst_node, double time = -1.0)
        : Error("no convergence after " + std::to_string(iterations) + " Newton iterations (worst node '" +
                worst_node + "'" + (time >= 0 ? ", t=" + std::to_string(time) : std::string()) + ")"),
          iterations_(iterations), worst_node_(std::move(worst_node)) {}

    int iterations() const noexcept { return iterations_; }
    const std::string& worst_node() const noexcept { return worst_node_; }

private:
    int iterations_;
    std::string worst_node_;
};

class SingularMatrix : public Error {
public:
    explicit SingularMatrix(std::vector<std::string> nodes)
        : Error("singular circuit matrix; offending nodes: " + join(nodes)), nodes_(std::move(nodes)) {}

    const std::vector<std::string>& nodes() const noexcept { return nodes_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& n : v) s += (s.empty() ? "" : ", ") + n;
        return s.empty() ? "<unknown>" : s;
    }
    std::vector<std::string> nodes_;
};

/// The output never crossed 50% after any input edge: the distorted-output signal.
class NoTransition : public Error {
public:
    using Error::Error;
};

class WindowTooShort : public Error {
public:
    using Error::Error;
};

class InfeasibleStart : public Error {
public:
    using Error::Error;
};

class FileNotFound : public Error {
public:
    explicit FileNotFound(const std::string& path) : Error("file not found: " + path) {}
};

}  // namespace cellforge
