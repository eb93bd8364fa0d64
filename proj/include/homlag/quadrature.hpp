#pragma once

#include <functional>
#include <span>
#include <vector>

namespace homlag {

struct QuadratureSpec {
    int order = 8;
    int max_refine = 14;
    double tol = 1e-10;
};

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Composite Gauss-Legendre on [a, b] with 2^level equal panels.
double composite_gauss(const std::function<double(double)>& f, double a, double b, int order,
                       int level);

/// Refines panel count until successive estimates differ by <= tol;
/// throws Error{NoConvergence} after max_refine doublings.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec);

/// Tensor-product Gauss-Legendre over the unit box [0,1]^D with `grid`
/// panels per axis. Summation order is fixed for reproducibility.
double box_integrate(const std::function<double(std::span<const double>)>& f, int D, int grid,
                     int order);

}  // namespace homlag
