/// @file errors.hpp
/// @brief Exception hierarchy shared by all twosphere modules.
#pragma once

#include <stdexcept>
#include <string>

namespace twosphere {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation at a coordinate singularity (bipolar foci, point at infinity,
/// stokeslet location).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Series did not reach the requested tail tolerance before the hard cap.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double achieved_tail, int modes)
        : Error(what), achieved_tail_(achieved_tail), modes_(modes) {}

    [[nodiscard]] double achieved_tail() const noexcept { return achieved_tail_; }
    [[nodiscard]] int modes() const noexcept { return modes_; }

private:
    double achieved_tail_;
    int modes_;
};

/// Integrator step size collapsed away from a termination event.
class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, double t, double h, double hdot)
        : Error(what), t_(t), h_(h), hdot_(hdot) {}

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] double hdot() const noexcept { return hdot_; }

private:
    double t_, h_, hdot_;
};

/// Input describes a regime in which the requested quantity does not exist
/// (e.g. a collision time when the spheres never approach).
class InvalidRegimeError : public Error {
public:
    using Error::Error;
};

} // namespace twosphere
