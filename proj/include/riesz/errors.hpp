#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A quadrature or extrapolation did not reach its tolerance. Carries the
/// best estimate found before the budget ran out.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double best_estimate, double error_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_estimate() const noexcept { return error_estimate_; }

private:
    double best_estimate_;
    double error_estimate_;
};

/// Grid or workload exceeds the configured memory budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Valid request outside the supported envelope (e.g. rotations for d > 3).
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed command line or configuration.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent data found while merging reports.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace riesz
