#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "conservo/dense.hpp"
#include "conservo/errors.hpp"

namespace conservo {

/// A first-order dynamical system x' = f(t, x) together with the conserved
/// quantities psi it is expected to preserve. Immutable after construction
/// and shareable across threads; all callbacks must be pure.
struct SystemSpec {
    std::string name;
    std::size_t dim = 0;          // n, state dimension
    std::size_t n_conserved = 0;  // m, number of conserved quantities (m < n)
    bool time_dependent = false;  // psi depends explicitly on t

    /// f(t, x) -> out[n]
    std::function<void(double, std::span<const double>, std::span<double>)> source;

    /// psi(t, x) -> out[m]
    std::function<void(double, std::span<const double>, std::span<double>)> conserved;

    /// Optional d(psi)/dx (t, x) -> m x n matrix. Used for degenerate
    /// divided-difference columns and validation; a finite-difference
    /// fallback is substituted when absent.
    std::function<void(double, std::span<const double>, DenseMatrix&)> grad_conserved;

    /// Optional closed-form discrete multiplier (t, x_new, x_old) -> m x n.
    /// Must satisfy the discrete chain rule to rounding; steppers prefer it
    /// over the generic telescoping construction when supplied.
    std::function<void(double, std::span<const double>, std::span<const double>, DenseMatrix&)>
        analytic_multiplier;

    /// Optional admissible-domain predicate. Absent means all of R^n.
    std::function<bool(std::span<const double>)> in_domain;

    bool contains(std::span<const double> x) const { return !in_domain || in_domain(x); }

    void check_domain(std::span<const double> x) const {
        if (in_domain && !in_domain(x))
            throw DomainViolation(name + ": state outside admissible domain");
    }

    // The domain guard protects the conserved quantities (logs, inverse
    // distances); source terms are evaluated as-is and guard internally
    // where they have their own singularities.
    void eval_source(double t, std::span<const double> x, std::span<double> out) const {
        source(t, x, out);
    }

    void eval_conserved(double t, std::span<const double> x, std::span<double> out) const {
        check_domain(x);
        conserved(t, x, out);
    }
};

}  // namespace conservo
