#pragma once

#include "graphclust/dense_matrix.hpp"

namespace graphclust {

/// Dense inverse via LU with partial pivoting. Throws if a pivot falls to
/// 1e-12 or below, naming the pivot index.
DenseMatrix inverse(const DenseMatrix& m);

}  // namespace graphclust
