#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tlsnl {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : std::runtime_error(what), residuals_(std::move(residuals)) {}

    const std::vector<double>& residuals() const noexcept { return residuals_; }
    double last_residual() const noexcept { return residuals_.empty() ? 0.0 : residuals_.back(); }

private:
    std::vector<double> residuals_;
};

class StiffnessError : public std::runtime_error {
public:
    StiffnessError(const std::string& what, double t, double dt)
        : std::runtime_error(what), t_(t), dt_(dt) {}

    double time() const noexcept { return t_; }
    double step() const noexcept { return dt_; }

private:
    double t_;
    double dt_;
};

}  // namespace tlsnl
