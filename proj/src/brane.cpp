#include "homlag/brane.hpp"

#include <cmath>

#include "homlag/quadrature.hpp"

namespace homlag {

namespace {

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

// full ordered-tuple contraction of the minor tensor with index-wise
// g-lowering: D! * sum_{G,G'} Y^G det(g[G, G']) Y^{G'}
double ordered_contraction(std::span<const double> minors, const SymTensor<double>& g,
                           const std::vector<std::vector<int>>& combos, int D) {
    double acc = 0.0;
    Mat sub(D, D);
    for (size_t a = 0; a < combos.size(); ++a)
        for (size_t b = 0; b < combos.size(); ++b) {
            for (int i = 0; i < D; ++i)
                for (int j = 0; j < D; ++j)
                    sub(i, j) = g.at({combos[a][static_cast<size_t>(i)], combos[b][static_cast<size_t>(j)]});
            acc += minors[a] * det_and_rank(sub).det * minors[b];
        }
    return static_cast<double>(factorial(D)) * acc;
}

}  // namespace

Mat Embedding::jacobian(std::span<const double> z) const {
    std::vector<Jet2> zj;
    zj.reserve(static_cast<size_t>(D_));
    for (int i = 0; i < D_; ++i) zj.push_back(Jet2::variable(z[static_cast<size_t>(i)], i, D_));
    const std::vector<Jet2> phi = eval(std::span<const Jet2>(zj));
    Mat J(m_, D_);
    for (int a = 0; a < m_; ++a)
        for (int i = 0; i < D_; ++i) J(a, i) = phi[static_cast<size_t>(a)].d(i);
    return J;
}

std::vector<std::vector<int>> index_combinations(int m, int D) {
    std::vector<std::vector<int>> out;
    std::vector<int> c(static_cast<size_t>(D));
    for (int i = 0; i < D; ++i) c[static_cast<size_t>(i)] = i;
    while (true) {
        out.push_back(c);
        int i = D - 1;
        while (i >= 0 && c[static_cast<size_t>(i)] == m - D + i) --i;
        if (i < 0) break;
        ++c[static_cast<size_t>(i)];
        for (int j = i + 1; j < D; ++j) c[static_cast<size_t>(j)] = c[static_cast<size_t>(j - 1)] + 1;
    }
    return out;
}

double minor_det(const Mat& J, std::span<const int> rows) {
    const int D = static_cast<int>(rows.size());
    Mat sub(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) sub(i, j) = J(rows[static_cast<size_t>(i)], j);
    return det_and_rank(sub).det;
}

MinorsResult jacobian_minors(const Embedding& e, std::span<const double> z) {
    const Mat J = e.jacobian(z);
    const int D = e.brane_dim(), m = e.target_dim();
    MinorsResult out;
    const auto combos = index_combinations(m, D);
    out.values.reserve(combos.size());
    double largest = 0.0;
    for (const auto& c : combos) {
        const double d = minor_det(J, std::span<const int>(c));
        largest = std::max(largest, std::abs(d));
        out.values.push_back(d);
    }
    // all D x D minors vanish iff rank < D
    double jnorm = 0.0;
    for (double a : J.a) jnorm = std::max(jnorm, std::abs(a));
    out.degenerate = largest <= 1e-12 * std::max(1.0, std::pow(jnorm, D));
    return out;
}

InducedMetric induced_metric(const Embedding& e, const TensorField& g, std::span<const double> z) {
    const int D = e.brane_dim(), m = e.target_dim();
    const Mat J = e.jacobian(z);
    const std::vector<double> p = e.eval(z);
    const SymTensor<double> gm = g.eval(std::span<const double>(p));
    InducedMetric out;
    out.h = Mat(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) {
            double acc = 0.0;
            for (int mu = 0; mu < m; ++mu)
                for (int nu = 0; nu < m; ++nu) acc += gm.at({mu, nu}) * J(mu, a) * J(nu, b);
            out.h(a, b) = acc;
        }
    out.det = det_and_rank(out.h).det;
    const MinorsResult minors = jacobian_minors(e, z);
    if (minors.degenerate)
        throw Error(ErrorCode::DegenerateJacobian, "embedding Jacobian rank < D");
    return out;
}

DngValue dng_lagrangian(const Embedding& e, const TensorField& g, std::span<const double> z,
                        DngNormalization normalization) {
    const int D = e.brane_dim(), m = e.target_dim();
    const MinorsResult minors = jacobian_minors(e, z);
    if (minors.degenerate)
        throw Error(ErrorCode::DegenerateJacobian, "embedding Jacobian rank < D");
    const std::vector<double> p = e.eval(z);
    const SymTensor<double> gm = g.eval(std::span<const double>(p));
    const auto combos = index_combinations(m, D);
    double radicand = ordered_contraction(minors.values, gm, combos, D);
    if (normalization == DngNormalization::cauchy_binet)
        radicand /= static_cast<double>(factorial(D));
    DngValue out;
    if (std::abs(radicand) < 1e-14)
        throw Error(ErrorCode::NullWorldvolume, "worldvolume radicand below threshold");
    out.radicand_sign = radicand > 0.0 ? 1 : -1;
    out.value = std::sqrt(std::abs(radicand));
    return out;
}

namespace {

double brane_integrand(const Embedding& e, const BraneLagrangian& bl, std::span<const double> z) {
    using std::pow;
    double L = 0.0;
    const bool need_minors = static_cast<bool>(bl.one_form) || !bl.omega_terms.empty();
    std::vector<double> minors;
    std::vector<double> point;
    if (need_minors || bl.metric) point = e.eval(z);
    if (need_minors) {
        const MinorsResult mr = jacobian_minors(e, z);
        if (mr.degenerate) throw Error(ErrorCode::DegenerateJacobian, "degenerate Jacobian node");
        minors = mr.values;
    }
    if (bl.one_form) {
        const std::vector<double> A = bl.one_form(point);
        if (A.size() != minors.size())
            throw Error(ErrorCode::DimMismatch, "one-form coefficient count != C(m, D)");
        for (size_t i = 0; i < A.size(); ++i) L += A[i] * minors[i];
    }
    if (bl.metric) L += dng_lagrangian(e, *bl.metric, z, bl.normalization).value;
    for (const auto& term : bl.omega_terms) {
        const SymTensor<double> S = term.field(point);
        if (S.dim() != static_cast<int>(minors.size()))
            throw Error(ErrorCode::DimMismatch, "omega-term tensor dim != C(m, D)");
        const double radicand = contract_full(S, std::span<const double>(minors));
        if (term.order == 1) {
            L += term.weight * radicand;
        } else {
            if (radicand <= 0.0)
                throw Error(ErrorCode::SignDomain, "non-positive omega-term radicand");
            L += term.weight * pow(radicand, 1.0 / term.order);
        }
    }
    return L;
}

}  // namespace

double brane_action(const Embedding& e, const BraneLagrangian& bl, int grid, int order) {
    const int D = e.brane_dim();
    return box_integrate([&](std::span<const double> z) { return brane_integrand(e, bl, z); }, D,
                         grid, order);
}

DiffeoResult diffeo_test(const Embedding& e, const BraneLagrangian& bl, const BoxMap& zeta,
                         int grid, int order, int refine) {
    if (zeta.dim() != e.brane_dim())
        throw Error(ErrorCode::DimMismatch, "reparametrization dimension != brane dimension");
    const int D = e.brane_dim(), m = e.target_dim();
    // composed embedding; jet evaluation checks orientation at every node
    Embedding pulled(D, m, [e, zeta, D]<class T>(std::span<const T> z) {
        const std::vector<T> u = zeta.eval(z);
        if constexpr (std::same_as<T, Jet2>) {
            Mat dz(D, D);
            for (int a = 0; a < D; ++a)
                for (int i = 0; i < D; ++i) dz(a, i) = u[static_cast<size_t>(a)].d(i);
            if (det_and_rank(dz).det <= 0.0)
                throw Error(ErrorCode::NonOrientation,
                            "reparametrization Jacobian determinant <= 0 at a node");
        }
        return e.eval(std::span<const T>(u));
    });
    const int g = grid << refine;
    DiffeoResult out;
    out.action_original = brane_action(e, bl, g, order);
    out.action_pulled = brane_action(pulled, bl, g, order);
    out.rel_diff = std::abs(out.action_pulled - out.action_original) /
                   std::max(1e-300, std::abs(out.action_original));
    return out;
}

double pullback_volume_check(const Embedding& e, std::span<const double> omega_coeffs,
                             std::span<const double> z) {
    const MinorsResult mr = jacobian_minors(e, z);
    if (omega_coeffs.size() != mr.values.size())
        throw Error(ErrorCode::DimMismatch, "form coefficient count != C(m, D)");
    double acc = 0.0;
    for (size_t i = 0; i < mr.values.size(); ++i) acc += omega_coeffs[i] * mr.values[i];
    return acc;
}

}  // namespace homlag
