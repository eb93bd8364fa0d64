#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "homlag/errors.hpp"

namespace homlag {

/// Second-order truncated Taylor scalar: value, gradient and Hessian with
/// respect to a runtime-sized set of k active variables. The Hessian is
/// stored as a packed upper triangle of length k(k+1)/2 and is symmetric by
/// construction. A jet with k == 0 acts as a broadcastable constant.
class Jet2 {
public:
    double val = 0.0;

    Jet2() = default;
    explicit Jet2(double v) : val(v) {}

    static Jet2 constant(double v, int k) {
        Jet2 j(v);
        j.resize(k);
        return j;
    }

    /// Active variable number `index` out of `k`, seeded with unit gradient.
    static Jet2 variable(double v, int index, int k) {
        Jet2 j = constant(v, k);
        j.grad_[static_cast<size_t>(index)] = 1.0;
        return j;
    }

    int vars() const { return k_; }
    double value() const { return val; }
    double d(int i) const { return k_ == 0 ? 0.0 : grad_[static_cast<size_t>(i)]; }
    double dd(int i, int j) const { return k_ == 0 ? 0.0 : hess_[hidx(i, j)]; }
    void set_d(int i, double g) { grad_[static_cast<size_t>(i)] = g; }
    void set_dd(int i, int j, double h) { hess_[hidx(i, j)] = h; }

    // packed (i,j) -> upper-triangle offset, order-insensitive
    size_t hidx(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<size_t>(i) * (2 * static_cast<size_t>(k_) - i - 1) / 2 + j;
    }

    Jet2& operator+=(const Jet2& o) {
        if (o.k_ == 0) { val += o.val; return *this; }
        if (k_ == 0) { const double v = val; *this = o; val += v; return *this; }
        assert(k_ == o.k_);
        val += o.val;
        for (size_t i = 0; i < grad_.size(); ++i) grad_[i] += o.grad_[i];
        for (size_t i = 0; i < hess_.size(); ++i) hess_[i] += o.hess_[i];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        if (o.k_ == 0) { val -= o.val; return *this; }
        if (k_ == 0) { const double v = val; *this = -o; val += v; return *this; }
        assert(k_ == o.k_);
        val -= o.val;
        for (size_t i = 0; i < grad_.size(); ++i) grad_[i] -= o.grad_[i];
        for (size_t i = 0; i < hess_.size(); ++i) hess_[i] -= o.hess_[i];
        return *this;
    }
    Jet2& operator*=(double s) {
        val *= s;
        for (double& g : grad_) g *= s;
        for (double& h : hess_) h *= s;
        return *this;
    }

    friend Jet2 operator+(Jet2 a, const Jet2& b) { a += b; return a; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { a -= b; return a; }
    friend Jet2 operator+(Jet2 a, double s) { a.val += s; return a; }
    friend Jet2 operator+(double s, Jet2 a) { a.val += s; return a; }
    friend Jet2 operator-(Jet2 a, double s) { a.val -= s; return a; }
    friend Jet2 operator-(double s, const Jet2& a) { Jet2 r = -a; r.val += s; return r; }
    friend Jet2 operator*(Jet2 a, double s) { a *= s; return a; }
    friend Jet2 operator*(double s, Jet2 a) { a *= s; return a; }
    friend Jet2 operator/(Jet2 a, double s) { a *= 1.0 / s; return a; }

    friend Jet2 operator-(const Jet2& a) {
        Jet2 r = a;
        r.val = -r.val;
        for (double& g : r.grad_) g = -g;
        for (double& h : r.hess_) h = -h;
        return r;
    }

    // Leibniz to second order: (uv)'' = u''v + u'v' + v'u' + uv''
    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        if (a.k_ == 0) { Jet2 r = b; r *= a.val; return r; }
        if (b.k_ == 0) { Jet2 r = a; r *= b.val; return r; }
        assert(a.k_ == b.k_);
        Jet2 r = Jet2::constant(0.0, a.k_);
        r.val = a.val * b.val;
        const int k = a.k_;
        for (int i = 0; i < k; ++i)
            r.grad_[static_cast<size_t>(i)] = a.grad_[static_cast<size_t>(i)] * b.val +
                                              b.grad_[static_cast<size_t>(i)] * a.val;
        size_t o = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j, ++o)
                r.hess_[o] = a.hess_[o] * b.val + b.hess_[o] * a.val +
                             a.grad_[static_cast<size_t>(i)] * b.grad_[static_cast<size_t>(j)] +
                             a.grad_[static_cast<size_t>(j)] * b.grad_[static_cast<size_t>(i)];
        return r;
    }

    friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * recip(b); }
    friend Jet2 operator/(double s, const Jet2& b) { return recip(b) * s; }

    /// f(u) propagated by the chain rule from f(u0), f'(u0), f''(u0).
    static Jet2 compose(const Jet2& u, double f, double df, double ddf) {
        Jet2 r = u;
        r.val = f;
        const int k = u.k_;
        for (double& g : r.grad_) g *= df;
        size_t o = 0;
        for (int i = 0; i < k; ++i)
            for (int j = i; j < k; ++j, ++o)
                r.hess_[o] = df * u.hess_[o] +
                             ddf * u.grad_[static_cast<size_t>(i)] * u.grad_[static_cast<size_t>(j)];
        return r;
    }

    friend Jet2 recip(const Jet2& u) {
        const double iv = 1.0 / u.val;
        return compose(u, iv, -iv * iv, 2.0 * iv * iv * iv);
    }
    friend Jet2 sqrt(const Jet2& u) {
        const double s = std::sqrt(u.val);
        return compose(u, s, 0.5 / s, -0.25 / (s * u.val));
    }
    friend Jet2 pow(const Jet2& u, double p) {
        const double f = std::pow(u.val, p);
        return compose(u, f, p * std::pow(u.val, p - 1.0), p * (p - 1.0) * std::pow(u.val, p - 2.0));
    }
    friend Jet2 exp(const Jet2& u) {
        const double e = std::exp(u.val);
        return compose(u, e, e, e);
    }
    friend Jet2 log(const Jet2& u) {
        const double iv = 1.0 / u.val;
        return compose(u, std::log(u.val), iv, -iv * iv);
    }
    friend Jet2 sin(const Jet2& u) {
        const double s = std::sin(u.val), c = std::cos(u.val);
        return compose(u, s, c, -s);
    }
    friend Jet2 cos(const Jet2& u) {
        const double s = std::sin(u.val), c = std::cos(u.val);
        return compose(u, c, -s, -c);
    }

    bool finite() const {
        if (!std::isfinite(val)) return false;
        for (double g : grad_) if (!std::isfinite(g)) return false;
        for (double h : hess_) if (!std::isfinite(h)) return false;
        return true;
    }

private:
    int k_ = 0;
    std::vector<double> grad_;
    std::vector<double> hess_;

    void resize(int k) {
        k_ = k;
        grad_.assign(static_cast<size_t>(k), 0.0);
        hess_.assign(static_cast<size_t>(k) * (k + 1) / 2, 0.0);
    }
};

inline double value_of(double x) { return x; }
inline double value_of(const Jet2& x) { return x.value(); }

}  // namespace homlag
