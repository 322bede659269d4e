#pragma once

#include <array>
#include <span>
#include <vector>

#include "cellcount/errors.hpp"

namespace cellcount {

// Solves A*x = b via Cholesky for a symmetric positive definite matrix,
// row-major n*n. Throws SingularSystem when a pivot collapses (rank
// deficiency), so callers get a hard error instead of garbage weights.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b);

// Least-squares polynomial fit of y on x, degree 1 or 2. Solved on a
// centered and scaled copy of x in extended precision, then expanded back,
// so raw-basis coefficients stay accurate even when x spans [0, 255].
// Returns {a0, a1, a2}; a2 is 0 for degree 1.
std::array<double, 3> polyfit(std::span<const double> x, std::span<const double> y, int degree);

// Evaluates a0 + a1*x + a2*x^2.
inline double polyval(const std::array<double, 3>& coeff, double x) {
    return coeff[0] + x * (coeff[1] + x * coeff[2]);
}

}  // namespace cellcount
