#pragma once

#include <Eigen/Dense>

namespace facehop {

// Eigen-decomposition of a symmetric matrix with the conventions every PCA
// in the pipeline shares: eigenvalues in non-increasing order (ties keep the
// solver's lower slot first), eigenvectors as rows with their
// largest-magnitude entry made positive. At most max_components pairs are
// returned; pass the matrix size to get all of them.
struct EigResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // one eigenvector per row
};

EigResult sorted_symmetric_eig(const Eigen::MatrixXd& sym, int max_components);

}  // namespace facehop
