#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilab {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = 0.69314718055994530942;

/// End of (0, inf) an object refers to: head is t -> 0, tail is t -> inf.
enum class Side { none, head, tail };

inline const char* side_name(Side s) {
    switch (s) {
        case Side::head: return "head";
        case Side::tail: return "tail";
        default: return "none";
    }
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " at position " + std::to_string(pos)), pos_(pos) {}
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

/// A hypothesis of a construction or theorem does not hold.
class AdmissibilityError : public Error {
public:
    AdmissibilityError(std::string condition, const std::string& detail)
        : Error("condition " + condition + " violated: " + detail), condition_(std::move(condition)) {}
    const std::string& condition() const { return condition_; }

private:
    std::string condition_;
};

class DivergenceError : public Error {
public:
    DivergenceError(Side side, const std::string& what)
        : Error(what + " diverges at " + side_name(side)), side_(side) {}
    Side side() const { return side_; }

private:
    Side side_;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// One-sided derivatives at a breakpoint disagree.
class BreakpointError : public Error {
public:
    BreakpointError(double left, double right)
        : Error("derivative undefined at breakpoint (left " + std::to_string(left) + ", right " +
                std::to_string(right) + ")"),
          left_(left), right_(right) {}
    double left() const { return left_; }
    double right() const { return right_; }

private:
    double left_, right_;
};

/// Conjugate exponent, with 1 <-> inf.
inline double conjugate(double q) {
    if (q == 1.0) return kInf;
    if (std::isinf(q)) return 1.0;
    return q / (q - 1.0);
}

inline void require_exponent(double q) {
    if (!(q >= 1.0)) throw DomainError("exponent q must lie in [1, inf], got " + std::to_string(q));
}

}  // namespace ilab
