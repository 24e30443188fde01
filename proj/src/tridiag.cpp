#include "acns/tridiag.hpp"

#include <cmath>

namespace acns {

void thomas_solve_inplace(const double* lower, const double* diag, const double* upper,
                          double* rhs, double* work, size_t n) {
    double maxd = 0.0;
    for (size_t i = 0; i < n; ++i) maxd = std::max(maxd, std::abs(diag[i]));
    const double eps = 1e-14 * maxd;

    double piv = diag[0];
    if (std::abs(piv) <= eps) throw SingularError("thomas_solve: zero pivot at row 0");
    rhs[0] /= piv;
    for (size_t i = 1; i < n; ++i) {
        work[i] = upper[i - 1] / piv;
        piv = diag[i] - lower[i - 1] * work[i];
        if (std::abs(piv) <= eps)
            throw SingularError("thomas_solve: zero pivot at row " + std::to_string(i));
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / piv;
    }
    for (size_t i = n - 1; i-- > 0;) rhs[i] -= work[i + 1] * rhs[i + 1];
}

std::vector<double> thomas_solve(const Tridiag& m, std::vector<double> rhs) {
    const size_t n = m.size();
    if (rhs.size() != n || m.lower.size() + 1 != n || m.upper.size() + 1 != n)
        throw std::invalid_argument("thomas_solve: size mismatch");
    std::vector<double> work(n);
    thomas_solve_inplace(m.lower.data(), m.diag.data(), m.upper.data(), rhs.data(),
                         work.data(), n);
    return rhs;
}

} // namespace acns
