#pragma once

#include <vector>

#include "graphclust/dense_matrix.hpp"

namespace graphclust {

/// Eigenvalues sorted ascending, column i of `vectors` paired with
/// values[i]. Columns are unit-norm and mutually orthogonal; the sign is
/// fixed so each vector's largest-magnitude entry is positive.
struct EigenPairs {
    std::vector<double> values;
    DenseMatrix vectors;  // n x k
};

/// The k algebraically smallest eigenpairs of a symmetric matrix, via full
/// Householder tridiagonalization followed by implicit-shift QL.
/// Throws if the matrix is asymmetric beyond 1e-10 or k is out of range.
EigenPairs sym_eigs_smallest(const DenseMatrix& m, std::size_t k);

}  // namespace graphclust
