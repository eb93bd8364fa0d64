#include "homlag/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "homlag/errors.hpp"

namespace homlag {

namespace {

GaussRule compute_rule(int order) {
    GaussRule rule;
    rule.nodes.resize(static_cast<size_t>(order));
    rule.weights.resize(static_cast<size_t>(order));
    for (int i = 0; i < order; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[static_cast<size_t>(i)] = x;
        rule.weights[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1 || order > 64)
        throw Error(ErrorCode::ConfigError, "quadrature order must be in 1..64");
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double composite_gauss(const std::function<double(double)>& f, double a, double b, int order,
                       int level) {
    const GaussRule& rule = gauss_legendre(order);
    const long panels = 1L << level;
    const double h = (b - a) / static_cast<double>(panels);
    double acc = 0.0;
    for (long p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h;
        double panel = 0.0;
        for (size_t i = 0; i < rule.nodes.size(); ++i)
            panel += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        acc += 0.5 * h * panel;
    }
    return acc;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec) {
    double prev = composite_gauss(f, a, b, spec.order, 0);
    for (int level = 1; level <= spec.max_refine; ++level) {
        const double cur = composite_gauss(f, a, b, spec.order, level);
        if (std::abs(cur - prev) <= spec.tol) return cur;
        prev = cur;
    }
    throw Error(ErrorCode::NoConvergence, "quadrature did not converge within max_refine");
}

double box_integrate(const std::function<double(std::span<const double>)>& f, int D, int grid,
                     int order) {
    if (grid < 1) throw Error(ErrorCode::ConfigError, "quadrature grid must be >= 1");
    const GaussRule& rule = gauss_legendre(order);
    const double h = 1.0 / grid;
    // flatten panel x node loops per axis into one index list
    std::vector<double> axis_nodes, axis_weights;
    for (int p = 0; p < grid; ++p)
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            axis_nodes.push_back((p + 0.5 + 0.5 * rule.nodes[i]) * h);
            axis_weights.push_back(0.5 * h * rule.weights[i]);
        }
    const size_t per_axis = axis_nodes.size();
    std::vector<size_t> idx(static_cast<size_t>(D), 0);
    std::vector<double> z(static_cast<size_t>(D));
    double acc = 0.0;
    while (true) {
        double w = 1.0;
        for (int d = 0; d < D; ++d) {
            z[static_cast<size_t>(d)] = axis_nodes[idx[static_cast<size_t>(d)]];
            w *= axis_weights[idx[static_cast<size_t>(d)]];
        }
        acc += w * f(z);
        int d = D - 1;
        while (d >= 0 && ++idx[static_cast<size_t>(d)] == per_axis) idx[static_cast<size_t>(d--)] = 0;
        if (d < 0) break;
    }
    return acc;
}

}  // namespace homlag
