#pragma once

#include <stdexcept>
#include <string>

namespace boolperc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a power-law measure would have infinite d-moment.
class DivergentMoment : public Error {
public:
    using Error::Error;
};

// Expected number of discarded balls above r_max exceeds the budget.
class TruncationBudgetExceeded : public Error {
public:
    using Error::Error;
};

class WindowTooSmall : public Error {
public:
    WindowTooSmall(const std::string& what, std::string required)
        : Error(what), required_window(std::move(required)) {}
    std::string required_window;
};

class BracketInvalid : public Error {
public:
    using Error::Error;
};

class ConditioningTooRare : public Error {
public:
    ConditioningTooRare(const std::string& what, double rate)
        : Error(what), observed_rate(rate) {}
    double observed_rate;
};

class ConfigInvalid : public Error {
public:
    using Error::Error;
};

class SchemaMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace boolperc
