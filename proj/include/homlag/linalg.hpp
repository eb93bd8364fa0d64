#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace homlag {

/// Row-major dense matrix, small (chart dimensions only).
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

struct SolveResult {
    std::vector<double> x;
    double cond_estimate = 0.0;  // ratio-of-extreme-pivots based
    double residual = 0.0;       // ||A x - b|| of the original (unscaled) system
    int rank = 0;
    bool ok = false;
};

/// Square solve by Gaussian elimination with partial pivoting.
/// cond_estimate = |pivot|_max / |pivot|_min.
SolveResult solve_square(Mat A, std::vector<double> b);

/// Least-squares solve of a (possibly tall) system via row-scaled normal
/// equations with diagonal-pivoted elimination. Rank-deficient directions are
/// dropped (min-norm-style), so the residual is well defined even for
/// structurally singular systems. cond_estimate = sqrt(max/min accepted
/// normal-matrix pivot).
SolveResult solve_least_squares(const Mat& A, std::span<const double> b);

/// Determinant and rank estimate (pivots above rel_tol * |pivot|_max).
struct DetRank {
    double det = 0.0;
    int rank = 0;
};
DetRank det_and_rank(Mat A, double rel_tol = 1e-12);

/// Matrix inverse (throws Error{SingularMetric} when pivoting breaks down).
Mat invert(Mat A);

/// Least-squares slope of y against x (both already transformed by caller).
double fit_slope(std::span<const double> x, std::span<const double> y);

double norm2(std::span<const double> v);
double frobenius(const Mat& A);

}  // namespace homlag
