#pragma once

#include <stdexcept>
#include <string>

namespace optrec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    /// Short stable identifier, used in CLI diagnostics.
    virtual const char* kind() const noexcept { return "Error"; }
};

/// Malformed input: shapes, non-symmetric matrices, bad parameters.
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ValidationError"; }
};

/// Argument outside the operation's domain (e.g. tau not in [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DomainError"; }
};

/// A matrix expected to be positive definite is (numerically) singular.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(const std::string& what, double lambda_min)
        : Error(what), lambda_min_(lambda_min) {}
    const char* kind() const noexcept override { return "RankDeficiencyError"; }
    double lambda_min() const noexcept { return lambda_min_; }

private:
    double lambda_min_;
};

/// V and ker(Lambda) intersect nontrivially; both worst-case errors are infinite.
class InfiniteWorstCaseError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "InfiniteWorstCaseError"; }
};

/// No element is consistent with both the model and the data.
class EmptyConsistentSet : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "EmptyConsistentSet"; }
};

/// The consistent set is nonempty but has no strictly feasible point.
class StrictFeasibilityError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "StrictFeasibilityError"; }
};

class RootNotFoundError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "RootNotFoundError"; }
};

/// A reduction produced a value that feasible instances cannot produce.
class NumericalGuardError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "NumericalGuardError"; }
};

/// The linear map does not reproduce V, so its global worst-case error is infinite.
class UnboundedGwce : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "UnboundedGwce"; }
};

}  // namespace optrec
