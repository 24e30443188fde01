#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace acns {

struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tridiagonal matrix: lower/upper have length n-1, diag length n.
struct Tridiag {
    std::vector<double> lower, diag, upper;
    size_t size() const { return diag.size(); }
};

/// In-place Thomas elimination on raw spans; `work` must hold n doubles.
/// Rejects pivots below 1e-14 * max |diag|.
void thomas_solve_inplace(const double* lower, const double* diag, const double* upper,
                          double* rhs, double* work, size_t n);

std::vector<double> thomas_solve(const Tridiag& m, std::vector<double> rhs);

} // namespace acns
