#ifndef TBCTL_ERRORS_HPP
#define TBCTL_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace tbctl {

/// Non-finite or otherwise malformed input to a numerical routine.
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input outside the mathematical domain of an operation (zero denominator etc.).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An integration produced a non-finite value. Carries the offending step.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, int step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
/// Carries the best iterate seen so the caller can still inspect it.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best_residual,
                     std::vector<double> best_iterate = {})
        : std::runtime_error(what),
          best_residual_(best_residual),
          best_iterate_(std::move(best_iterate)) {}
    double best_residual() const { return best_residual_; }
    const std::vector<double>& best_iterate() const { return best_iterate_; }

private:
    double best_residual_ = 0.0;
    std::vector<double> best_iterate_;
};

/// Regression design matrix is rank deficient or otherwise unusable.
class DegenerateInputError : public std::invalid_argument {
public:
    explicit DegenerateInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A ratio whose denominator is not strictly positive.
class UndefinedRatioError : public std::domain_error {
public:
    explicit UndefinedRatioError(const std::string& what) : std::domain_error(what) {}
};

/// Tied averted-case counts; the incremental ordering is undefined.
class TieError : public std::invalid_argument {
public:
    explicit TieError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace tbctl

#endif
