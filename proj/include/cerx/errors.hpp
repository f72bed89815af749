#pragma once

#include <stdexcept>
#include <string>

namespace cerx {

/// A required circuit/design quantity is zero, negative, or non-finite.
class NonPositiveValue : public std::invalid_argument {
public:
    explicit NonPositiveValue(const std::string& field)
        : std::invalid_argument("non-positive or non-finite value: " + field), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class OutOfRange : public std::out_of_range {
public:
    explicit OutOfRange(const std::string& what) : std::out_of_range(what) {}
};

class PhaseOutOfRange : public std::out_of_range {
public:
    explicit PhaseOutOfRange(double d)
        : std::out_of_range("phase-shift ratio outside [0, 0.25]: " + std::to_string(d)) {}
};

class NoConvergence : public std::runtime_error {
public:
    explicit NoConvergence(long cycles)
        : std::runtime_error("steady state not reached within " + std::to_string(cycles) + " cycles"),
          cycles_(cycles) {}
    long cycles() const noexcept { return cycles_; }

private:
    long cycles_;
};

class NonFinite : public std::runtime_error {
public:
    explicit NonFinite(double t)
        : std::runtime_error("state became non-finite at t = " + std::to_string(t) + " s") {}
};

class DegenerateOperatingPoint : public std::invalid_argument {
public:
    explicit DegenerateOperatingPoint(const std::string& what) : std::invalid_argument(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cerx
