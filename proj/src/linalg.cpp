#include "cellcount/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace cellcount {

namespace {

// In-place Cholesky A = L L^T followed by two triangular solves.
template <typename T>
std::vector<T> cholesky_solve_impl(std::vector<T> a, std::vector<T> b) {
    const std::size_t n = b.size();
    if (a.size() != n * n) {
        throw DimensionMismatch("cholesky_solve: matrix is " + std::to_string(a.size()) +
                                " entries, expected " + std::to_string(n * n));
    }
    T max_diag = 0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    const T floor = max_diag * static_cast<T>(1e-13);

    for (std::size_t j = 0; j < n; ++j) {
        T d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > floor)) {
            throw SingularSystem("cholesky_solve: non-positive pivot at column " +
                                 std::to_string(j));
        }
        const T l_jj = std::sqrt(d);
        a[j * n + j] = l_jj;
        for (std::size_t i = j + 1; i < n; ++i) {
            T s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l_jj;
        }
    }
    // forward: L y = b
    for (std::size_t i = 0; i < n; ++i) {
        T s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    // backward: L^T x = y
    for (std::size_t ii = n; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        T s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
        b[i] = s / a[i * n + i];
    }
    return b;
}

}  // namespace

std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b) {
    return cholesky_solve_impl(std::move(a), std::move(b));
}

std::array<double, 3> polyfit(std::span<const double> x, std::span<const double> y, int degree) {
    if (degree != 1 && degree != 2) {
        throw Error("polyfit: degree must be 1 or 2, got " + std::to_string(degree));
    }
    if (x.size() != y.size()) {
        throw DimensionMismatch("polyfit: x and y sizes differ");
    }
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(degree + 1)) {
        throw EmptyInput("polyfit: need at least degree+1 points");
    }

    long double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<long double>(n);
    long double scale = 0;
    for (double v : x) scale = std::max(scale, std::abs(static_cast<long double>(v) - mean));
    if (scale == 0) scale = 1;  // all x equal; normal matrix will be singular for degree >= 1

    // normal equations on the shifted basis t = (x - mean) / scale
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    std::vector<long double> g(m * m, 0), rhs(m, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const long double t = (static_cast<long double>(x[i]) - mean) / scale;
        long double pow_t[3] = {1, t, t * t};
        for (std::size_t r = 0; r < m; ++r) {
            rhs[r] += pow_t[r] * static_cast<long double>(y[i]);
            for (std::size_t c = 0; c < m; ++c) g[r * m + c] += pow_t[r] * pow_t[c];
        }
    }
    std::vector<long double> coeff = cholesky_solve_impl(std::move(g), std::move(rhs));

    // expand b0 + b1 t + b2 t^2 back to the raw basis
    const long double b0 = coeff[0];
    const long double b1 = coeff[1];
    const long double b2 = (m == 3) ? coeff[2] : 0;
    const long double inv = 1 / scale;
    std::array<double, 3> out{};
    out[2] = static_cast<double>(b2 * inv * inv);
    out[1] = static_cast<double>(b1 * inv - 2 * b2 * mean * inv * inv);
    out[0] = static_cast<double>(b0 - b1 * mean * inv + b2 * mean * mean * inv * inv);
    return out;
}

}  // namespace cellcount
