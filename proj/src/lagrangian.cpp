#include "homlag/lagrangian.hpp"

#include <cmath>

namespace homlag {

// dLambda/dtau = v^a d_a(Lambda) for plain inputs.
double gauge_term_rate(const ScalarField& lambda, std::span<const double> x,
                       std::span<const double> v) {
    const int m = static_cast<int>(x.size());
    std::vector<Jet2> xj;
    xj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) xj.push_back(Jet2::variable(x[static_cast<size_t>(i)], i, m));
    const Jet2 lam = lambda.eval(std::span<const Jet2>(xj));
    double s = 0.0;
    for (int a = 0; a < m; ++a) s += v[static_cast<size_t>(a)] * lam.d(a);
    return s;
}

// Jet over the 2m-variable (x, v) active set. Consumers touch only dL/dx,
// dL/dv, d2L/dvdv and d2L/dvdx, so the zeroed (x,x) block never leaks.
Jet2 gauge_term_rate(const ScalarField& lambda, std::span<const Jet2> x,
                     std::span<const Jet2> v) {
    const int m = static_cast<int>(x.size());
    const int k = 2 * m;
    std::vector<Jet2> xj;
    xj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) xj.push_back(Jet2::variable(x[static_cast<size_t>(i)].value(), i, m));
    const Jet2 lam = lambda.eval(std::span<const Jet2>(xj));

    Jet2 out = Jet2::constant(0.0, k);
    double val = 0.0;
    for (int a = 0; a < m; ++a) val += v[static_cast<size_t>(a)].value() * lam.d(a);
    out.val = val;
    for (int b = 0; b < m; ++b) {
        double dxb = 0.0;
        for (int a = 0; a < m; ++a) dxb += v[static_cast<size_t>(a)].value() * lam.dd(a, b);
        out.set_d(b, dxb);             // d/dx^b
        out.set_d(m + b, lam.d(b));    // d/dv^b
        for (int a = 0; a < m; ++a) out.set_dd(m + a, b, lam.dd(a, b));
    }
    return out;
}

double Lagrangian::eval(std::span<const double> x, std::span<const double> v) const {
    if (static_cast<int>(x.size()) != dim_ || static_cast<int>(v.size()) != dim_)
        throw Error(ErrorCode::DimMismatch, "state dimension != Lagrangian dimension");
    double s = 0.0;
    for (const auto& t : terms_) s += eval_term(t, x, v);
    if (gauge_term_) s += gauge_term_rate(*gauge_term_, x, v);
    return s;
}

Jet2 Lagrangian::eval(std::span<const Jet2> x, std::span<const Jet2> v) const {
    if (static_cast<int>(x.size()) != dim_ || static_cast<int>(v.size()) != dim_)
        throw Error(ErrorCode::DimMismatch, "state dimension != Lagrangian dimension");
    Jet2 s;
    for (const auto& t : terms_) s += eval_term(t, x, v);
    if (gauge_term_) s += gauge_term_rate(*gauge_term_, x, v);
    return s;
}

PhaseScalar monomial_scalar(const CanonicalTerm& term) {
    return PhaseScalar(term.field.dim(), [term]<class T>(std::span<const T> x, std::span<const T> v) {
        return detail::eval_monomial_impl(term, x, v);
    });
}

PhaseDerivs phase_derivs(const PhaseScalar& f, std::span<const double> x,
                         std::span<const double> v) {
    const int m = f.dim();
    if (static_cast<int>(x.size()) != m || static_cast<int>(v.size()) != m)
        throw Error(ErrorCode::DimMismatch, "state dimension mismatch");
    const int k = 2 * m;
    std::vector<Jet2> xj, vj;
    xj.reserve(static_cast<size_t>(m));
    vj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        xj.push_back(Jet2::variable(x[static_cast<size_t>(i)], i, k));
        vj.push_back(Jet2::variable(v[static_cast<size_t>(i)], m + i, k));
    }
    const Jet2 L = f.eval(std::span<const Jet2>(xj), std::span<const Jet2>(vj));

    PhaseDerivs out;
    out.value = L.value();
    out.dx.resize(static_cast<size_t>(m));
    out.dv.resize(static_cast<size_t>(m));
    out.d2_vv = Mat(m, m);
    out.d2_vx = Mat(m, m);
    for (int a = 0; a < m; ++a) {
        out.dx[static_cast<size_t>(a)] = L.d(a);
        out.dv[static_cast<size_t>(a)] = L.d(m + a);
        for (int b = 0; b < m; ++b) {
            out.d2_vv(a, b) = L.dd(m + a, m + b);
            out.d2_vx(a, b) = L.dd(m + a, b);
        }
    }
    return out;
}

std::vector<double> conjugate_momentum(const PhaseScalar& f, std::span<const double> x,
                                       std::span<const double> v) {
    return phase_derivs(f, x, v).dv;
}

double hamiltonian(const PhaseScalar& f, std::span<const double> x, std::span<const double> v) {
    const PhaseDerivs d = phase_derivs(f, x, v);
    double h = -d.value;
    for (size_t a = 0; a < d.dv.size(); ++a) h += v[a] * d.dv[a];
    return h;
}

double homogeneity_degree(const PhaseScalar& f, std::span<const double> x,
                          std::span<const double> v) {
    const PhaseDerivs d = phase_derivs(f, x, v);
    if (std::abs(d.value) < 1e-12 * (1.0 + norm2(v)))
        throw Error(ErrorCode::ZeroLagrangian, "Lagrangian too close to zero for degree estimate");
    double vdl = 0.0;
    for (size_t a = 0; a < d.dv.size(); ++a) vdl += v[a] * d.dv[a];
    return vdl / d.value;
}

std::pair<SymTensor<double>, SingularityReport> v_hessian(const PhaseScalar& f,
                                                          std::span<const double> x,
                                                          std::span<const double> v) {
    const int m = f.dim();
    const PhaseDerivs d = phase_derivs(f, x, v);
    SymTensor<double> M(2, m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) M.at({a, b}) = d.d2_vv(a, b);

    SingularityReport rep;
    rep.frob = frobenius(d.d2_vv);
    const DetRank dr = det_and_rank(d.d2_vv, 1e-9);
    rep.det_estimate = dr.det;
    rep.rank_estimate = dr.rank;
    std::vector<double> mv(static_cast<size_t>(m), 0.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) mv[static_cast<size_t>(a)] += d.d2_vv(a, b) * v[static_cast<size_t>(b)];
    const double denom = rep.frob * norm2(v);
    rep.mv_residual = denom > 0.0 ? norm2(mv) / denom : norm2(mv);
    return {M, rep};
}

SymTensor<double> source_tensor(const CanonicalTerm& t, std::span<const double> x,
                                std::span<const double> v) {
    const int n = t.order, m = t.field.dim();
    if (static_cast<int>(v.size()) != m)
        throw Error(ErrorCode::DimMismatch, "source_tensor: dimension mismatch");
    SymTensor<double> out(n, m);
    double prefactor = 1.0;
    if (n >= 2) {
        const SymTensor<double> S = t.field.eval(x);
        const double radicand = contract_full(S, v);
        if (radicand <= 0.0)
            throw Error(ErrorCode::SignDomain, "source_tensor: non-positive radicand");
        prefactor = std::pow(radicand, (1.0 - n) / n) / n;
    }
    MultiIndexIter it(n, m);
    std::size_t off = 0;
    do {
        double p = prefactor;
        for (int tt = 0; tt < n; ++tt) p *= v[static_cast<size_t>(it.idx[static_cast<size_t>(tt)])];
        out[off] = p;
        ++off;
    } while (it.next());
    return out;
}

std::vector<double> term_source_jet(const CanonicalTerm& t, std::span<const double> x,
                                    std::span<const double> v) {
    const SymTensor<double> S0 = t.field.eval(x);
    const int k = static_cast<int>(S0.size());
    SymTensor<Jet2> Sj(S0.rank(), S0.dim());
    for (int c = 0; c < k; ++c)
        Sj[static_cast<size_t>(c)] = Jet2::variable(S0[static_cast<size_t>(c)], c, k);
    std::vector<Jet2> vj;
    vj.reserve(v.size());
    for (double vi : v) vj.push_back(Jet2::constant(vi, k));

    Jet2 radicand = contract_full(Sj, std::span<const Jet2>(vj));
    Jet2 val;
    if (t.order == 1) {
        val = radicand * t.weight;
    } else {
        if (radicand.value() <= 0.0)
            throw Error(ErrorCode::SignDomain, "term_source_jet: non-positive radicand");
        val = pow(radicand, 1.0 / t.order) * t.weight;
    }
    std::vector<double> grad(static_cast<size_t>(k));
    for (int c = 0; c < k; ++c) grad[static_cast<size_t>(c)] = val.d(c);
    return grad;
}

SymTensor<double> velocity_metric(const VelocityPotential& A, std::span<const double> x,
                                  std::span<const double> v) {
    const int m = A.dim();
    if (static_cast<int>(x.size()) != m || static_cast<int>(v.size()) != m)
        throw Error(ErrorCode::DimMismatch, "velocity_metric: dimension mismatch");
    std::vector<Jet2> vj;
    vj.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) vj.push_back(Jet2::variable(v[static_cast<size_t>(i)], i, m));
    const std::vector<Jet2> Aj = A.eval(x, std::span<const Jet2>(vj));
    SymTensor<double> g(2, m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b)
            g.at({a, b}) = Aj[static_cast<size_t>(a)].d(b) + Aj[static_cast<size_t>(b)].d(a);
    return g;
}

}  // namespace homlag
