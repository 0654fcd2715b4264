#include "facehop/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "facehop/errors.hpp"

namespace facehop {

EigResult sorted_symmetric_eig(const Eigen::MatrixXd& sym, int max_components) {
    if (sym.rows() != sym.cols()) {
        throw ValidationError("eigendecomposition needs a square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("eigendecomposition did not converge");
    }

    std::vector<int> order(static_cast<std::size_t>(sym.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return solver.eigenvalues()[a] > solver.eigenvalues()[b];
    });

    const int k = std::min<int>(max_components, static_cast<int>(sym.rows()));
    EigResult result;
    result.values.resize(k);
    result.vectors.resize(k, sym.rows());
    for (int j = 0; j < k; ++j) {
        result.values[j] = solver.eigenvalues()[order[static_cast<std::size_t>(j)]];
        Eigen::VectorXd v = solver.eigenvectors().col(order[static_cast<std::size_t>(j)]);
        int pivot = 0;
        for (int i = 1; i < v.size(); ++i) {
            if (std::abs(v[i]) > std::abs(v[pivot])) pivot = i;
        }
        if (v[pivot] < 0.0) v = -v;
        result.vectors.row(j) = v.transpose();
    }
    return result;
}

}  // namespace facehop
