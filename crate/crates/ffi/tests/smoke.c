#include <math.h>
#include <stdio.h>
#include "fairpca.h"

int main(void) {
    /* Two groups of three points in the plane, r = 1. */
    const double data[] = {3, 1, -2, 0.5, 1, -1, 3, -1, -2, -0.5, 1, 1};
    const size_t groups[] = {0, 0, 0, 1, 1, 1};
    FpcaProblem *problem = NULL;
    if (fpca_problem_new(data, 6, 2, groups, 2, 1, FPCA_MODE_PAIRWISE, FPCA_PENALTY_SQUARED, -1.0, &problem) !=
        FPCA_STATUS_OK) {
        fprintf(stderr, "problem: %s\n", fpca_last_error_message());
        return 1;
    }
    FpcaSolverConfig config = fpca_solver_config_default();
    config.max_iters = 200;
    FpcaResult *result = NULL;
    if (fpca_solve(problem, &config, &result) != FPCA_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", fpca_last_error_message());
        return 1;
    }
    double u[2];
    if (fpca_result_subspace(result, u, 2) != FPCA_STATUS_OK || fabs(u[0] * u[0] + u[1] * u[1] - 1.0) > 1e-9) {
        return 1;
    }
    if (fpca_problem_new(data, 6, 2, groups, 2, 5, FPCA_MODE_PAIRWISE, FPCA_PENALTY_SQUARED, -1.0, &problem) !=
        FPCA_STATUS_DIMENSION) {
        return 1;
    }
    printf("%s ok %s\n", fpca_version(), fpca_last_error_message());
    fpca_result_free(result);
    fpca_problem_free(problem);
    return 0;
}
