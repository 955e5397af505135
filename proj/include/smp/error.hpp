#pragma once

#include <complex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (negative time, Re(s) < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation that a distribution kind does not support (pdf of an empirical law).
class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

/// Raised when a quantity is mathematically undefined for the model
/// (conditional hazard toward an unreachable state, infinite means).
class UndefinedQuantity : public Error {
public:
    using Error::Error;
};

/// Pivot below the singularity threshold during elimination.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

/// Numeric failure: quadrature non-convergence, non-finite transform values,
/// out-of-range inversion results. Carries the achieved error estimate and,
/// when known, the time point and Euler node at which it happened.
class NumericFailure : public Error {
public:
    explicit NumericFailure(const std::string& what, double achieved_error = 0.0)
        : Error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }
    const std::optional<double>& time() const noexcept { return time_; }
    const std::optional<std::complex<double>>& node() const noexcept { return node_; }

    /// Copy of this error annotated with the (t, node) where it occurred.
    NumericFailure at(double t, std::complex<double> node) const {
        std::ostringstream os;
        os << Error::what() << " [t=" << t << ", s=" << node.real() << (node.imag() < 0 ? "" : "+")
           << node.imag() << "i]";
        NumericFailure out(os.str(), achieved_error_);
        out.time_ = t;
        out.node_ = node;
        return out;
    }

private:
    double achieved_error_;
    std::optional<double> time_;
    std::optional<std::complex<double>> node_;
};

/// Model validation failure listing every violation found.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out = "invalid model:";
        for (const auto& v : items) {
            out += "\n  - ";
            out += v;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

} // namespace smp
