#include "graphclust/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphclust {

DenseMatrix inverse(const DenseMatrix& m) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("inverse: matrix not square");

    DenseMatrix lu = m;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(lu(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double a = std::fabs(lu(r, col));
            if (a > best) {
                best = a;
                piv = r;
            }
        }
        if (best <= 1e-12) {
            throw std::domain_error("inverse: singular matrix (pivot " + std::to_string(col) +
                                    " has magnitude " + std::to_string(best) + ")");
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(piv, j), lu(col, j));
            std::swap(perm[piv], perm[col]);
        }
        const double d = lu(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = lu(r, col) / d;
            lu(r, col) = f;
            for (std::size_t j = col + 1; j < n; ++j) lu(r, j) -= f * lu(col, j);
        }
    }

    // Solve LU x = P e_c for each unit column.
    DenseMatrix inv(n, n);
    std::vector<double> x(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < n; ++i) x[i] = (perm[i] == c) ? 1.0 : 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < i; ++j) s -= lu(i, j) * x[j];
            x[i] = s;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x[j];
            x[ii] = s / lu(ii, ii);
        }
        for (std::size_t i = 0; i < n; ++i) inv(i, c) = x[i];
    }
    return inv;
}

}  // namespace graphclust
