// 190 columns from one 3-dimensional subspace, 10 from another: the l2,1
// model pushes the 10 foreign columns into S.

#include "nrpca/problems.hpp"
#include "nrpca/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

int main() {
    const nrpca::Matrix x = nrpca::generate_outlier_columns(256, 190, 10, 3, 7);

    nrpca::SolverConfig cfg;
    cfg.penalty = nrpca::SparsePenalty::ColumnwiseL21;
    const auto r = nrpca::solve(x, cfg);
    const auto scores = nrpca::anomaly_scores(r.s);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    std::printf("top 12 columns by anomaly score:\n");
    for (std::size_t k = 0; k < 12; ++k) std::printf("  %3zu  %.4f\n", order[k], scores[order[k]]);
}
