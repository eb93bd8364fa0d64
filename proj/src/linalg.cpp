#include "homlag/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "homlag/errors.hpp"

namespace homlag {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double frobenius(const Mat& A) { return norm2(A.a); }

SolveResult solve_square(Mat A, std::vector<double> b) {
    const int n = A.rows;
    SolveResult r;
    r.x.assign(static_cast<size_t>(n), 0.0);
    const Mat A0 = A;
    const std::vector<double> b0 = b;

    double pmax = 0.0, pmin = 0.0;
    std::vector<int> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(piv)]);
        }
        const double p = std::abs(A(k, k));
        pmax = std::max(pmax, p);
        pmin = (k == 0) ? p : std::min(pmin, p);
        if (p == 0.0) {
            r.cond_estimate = std::numeric_limits<double>::infinity();
            r.rank = k;
            return r;
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) / A(k, k);
            A(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) A(i, j) -= f * A(k, j);
            b[static_cast<size_t>(i)] -= f * b[static_cast<size_t>(k)];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * r.x[static_cast<size_t>(j)];
        r.x[static_cast<size_t>(i)] = s / A(i, i);
    }
    r.rank = n;
    r.cond_estimate = (pmin > 0.0) ? pmax / pmin : std::numeric_limits<double>::infinity();
    std::vector<double> res(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = -b0[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) s += A0(i, j) * r.x[static_cast<size_t>(j)];
        res[static_cast<size_t>(i)] = s;
    }
    r.residual = norm2(res);
    r.ok = std::isfinite(r.cond_estimate);
    return r;
}

SolveResult solve_least_squares(const Mat& A, std::span<const double> b) {
    const int m = A.rows, n = A.cols;
    SolveResult r;
    r.x.assign(static_cast<size_t>(n), 0.0);

    // Row scaling to unit norm; rows that are exactly zero stay unscaled.
    std::vector<double> scale(static_cast<size_t>(m), 1.0);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += A(i, j) * A(i, j);
        s = std::sqrt(s);
        if (s > 0.0) scale[static_cast<size_t>(i)] = 1.0 / s;
    }

    // Normal matrix N = (SA)^T (SA), rhs = (SA)^T (Sb)
    Mat N(n, n);
    std::vector<double> rhs(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < m; ++i) {
        const double s2 = scale[static_cast<size_t>(i)] * scale[static_cast<size_t>(i)];
        for (int p = 0; p < n; ++p) {
            const double ap = A(i, p) * s2;
            rhs[static_cast<size_t>(p)] += ap * b[static_cast<size_t>(i)];
            for (int q = p; q < n; ++q) N(p, q) += ap * A(i, q);
        }
    }
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < p; ++q) N(p, q) = N(q, p);

    // Diagonal-pivoted symmetric elimination with rank truncation.
    std::vector<int> order;
    std::vector<char> used(static_cast<size_t>(n), 0);
    double pmax = 0.0, pmin = 0.0;
    for (int step = 0; step < n; ++step) {
        int piv = -1;
        double best = 0.0;
        for (int p = 0; p < n; ++p)
            if (!used[static_cast<size_t>(p)] && N(p, p) > best) {
                best = N(p, p);
                piv = p;
            }
        if (step == 0) pmax = best;
        // Pivots at the elimination noise floor (~1e-16 * pmax) are structural
        // zeros; drop them rather than divide by rounding residue.
        if (piv < 0 || best <= pmax * 3e-15) break;
        pmin = best;
        used[static_cast<size_t>(piv)] = 1;
        order.push_back(piv);
        for (int i = 0; i < n; ++i) {
            if (used[static_cast<size_t>(i)]) continue;
            const double f = N(i, piv) / N(piv, piv);
            for (int j = 0; j < n; ++j)
                if (!used[static_cast<size_t>(j)]) N(i, j) -= f * N(piv, j);
            rhs[static_cast<size_t>(i)] -= f * rhs[static_cast<size_t>(piv)];
            N(i, piv) = f;  // store multiplier
        }
    }
    r.rank = static_cast<int>(order.size());
    // Back substitution on the eliminated subset (dropped directions -> 0).
    for (int s = r.rank - 1; s >= 0; --s) {
        const int p = order[static_cast<size_t>(s)];
        double acc = rhs[static_cast<size_t>(p)];
        for (int t = s + 1; t < r.rank; ++t) {
            const int q = order[static_cast<size_t>(t)];
            acc -= N(p, q) * r.x[static_cast<size_t>(q)];
        }
        r.x[static_cast<size_t>(p)] = acc / N(p, p);
    }

    r.cond_estimate = (r.rank > 0 && pmin > 0.0) ? std::sqrt(pmax / pmin)
                                                 : std::numeric_limits<double>::infinity();
    std::vector<double> res(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double s = -b[static_cast<size_t>(i)];
        for (int j = 0; j < n; ++j) s += A(i, j) * r.x[static_cast<size_t>(j)];
        res[static_cast<size_t>(i)] = s;
    }
    r.residual = norm2(res);
    r.ok = (r.rank == n) && std::isfinite(r.cond_estimate);
    return r;
}

DetRank det_and_rank(Mat A, double rel_tol) {
    const int n = A.rows;
    DetRank out;
    double det = 1.0;
    double pmax = 0.0;
    std::vector<double> pivots;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            det = -det;
        }
        const double p = A(k, k);
        pivots.push_back(std::abs(p));
        pmax = std::max(pmax, std::abs(p));
        if (p == 0.0) { det = 0.0; break; }
        det *= p;
        for (int i = k + 1; i < n; ++i) {
            const double f = A(i, k) / p;
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
        }
    }
    if (pivots.size() < static_cast<size_t>(n)) det = 0.0;
    out.det = det;
    for (double p : pivots)
        if (p > rel_tol * pmax) ++out.rank;
    return out;
}

Mat invert(Mat A) {
    const int n = A.rows;
    Mat inv(n, n);
    for (int i = 0; i < n; ++i) inv(i, i) = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
        if (std::abs(A(piv, k)) < 1e-300)
            throw Error(ErrorCode::SingularMetric, "matrix not invertible");
        if (piv != k)
            for (int j = 0; j < n; ++j) {
                std::swap(A(k, j), A(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        const double d = A(k, k);
        for (int j = 0; j < n; ++j) {
            A(k, j) /= d;
            inv(k, j) /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            const double f = A(i, k);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                A(i, j) -= f * A(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double d = static_cast<double>(n) * sxx - sx * sx;
    return (static_cast<double>(n) * sxy - sx * sy) / d;
}

}  // namespace homlag
