#pragma once

#include <stdexcept>
#include <string>

namespace conservo {

/// A matrix required to be invertible / full rank was numerically singular.
struct SingularMatrix : std::runtime_error {
    explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative kernel (Jacobi SVD sweeps) exceeded its iteration budget.
struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

/// A state left the admissible domain of a dynamical system.
struct DomainViolation : std::runtime_error {
    explicit DomainViolation(const std::string& what) : std::runtime_error(what) {}
};

/// System parameters violate a required structural condition.
struct InvalidParams : std::invalid_argument {
    explicit InvalidParams(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace conservo
