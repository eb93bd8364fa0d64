#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homlag/backgrounds.hpp"
#include "homlag/brane.hpp"
#include "homlag/dynamics.hpp"
#include "homlag/scene.hpp"

namespace py = pybind11;
using namespace homlag;

namespace {

GaugeChoice gauge_from(const std::string& name, int order) {
    if (name == "proper_time") return GaugeProperTime{};
    if (name == "lagrangian_const") return GaugeLagrangianConst{};
    if (name == "term_const") return GaugeTermConst{order};
    throw Error(ErrorCode::GaugeInvalid, "gauge is proper_time, lagrangian_const or term_const");
}

PresetSpec spec_from(const std::string& name, const py::kwargs& kwargs) {
    PresetSpec spec;
    spec.name = name;
    for (const auto& item : kwargs) {
        const std::string key = py::cast<std::string>(item.first);
        if (key == "psi" || key == "phi")
            spec.profiles[key] = py::cast<std::vector<double>>(item.second);
        else
            spec.params[key] = py::cast<double>(item.second);
    }
    return spec;
}

py::dict trajectory_dict(const Trajectory& t) {
    py::list tau, x, v, L, h, gauge_value, drift;
    for (size_t i = 0; i < t.samples.size(); ++i) {
        tau.append(t.samples[i].tau);
        x.append(t.samples[i].x);
        v.append(t.samples[i].v);
        L.append(t.monitors[i].lagrangian);
        h.append(t.monitors[i].hamiltonian);
        gauge_value.append(t.monitors[i].gauge_value);
        drift.append(t.monitors[i].drift);
    }
    py::dict out;
    out["tau"] = tau;
    out["x"] = x;
    out["v"] = v;
    out["L"] = L;
    out["h"] = h;
    out["gauge_value"] = gauge_value;
    out["drift"] = drift;
    out["status"] = t.status == TrajectoryStatus::ok
                        ? "ok"
                        : (t.status == TrajectoryStatus::singular_system ? "singular_system"
                                                                         : "non_finite");
    out["note"] = t.note;
    return out;
}

CliOptions options_from(std::uint64_t seed, const std::optional<std::string>& format) {
    CliOptions opts;
    opts.seed = seed;
    opts.format = format;
    return opts;
}

}  // namespace

PYBIND11_MODULE(_homlag, m) {
    m.doc() = "reparametrization-invariant mechanics: homogeneous Lagrangians, gauge-fixed "
              "dynamics and d-brane actions";

    py::register_exception<Error>(m, "HomlagError");

    py::class_<Preset>(m, "Preset")
        .def_readonly("dim", &Preset::dim)
        .def_property_readonly("lagrangian", [](const Preset& p) { return p.lagrangian; })
        .def("metric_at",
             [](const Preset& p, const std::vector<double>& x) {
                 if (!p.metric) throw Error(ErrorCode::MissingParam, "preset has no metric field");
                 const auto g = p.metric->eval(std::span<const double>(x));
                 const int mdim = g.dim();
                 std::vector<std::vector<double>> out(static_cast<size_t>(mdim),
                                                      std::vector<double>(static_cast<size_t>(mdim)));
                 for (int a = 0; a < mdim; ++a)
                     for (int b = 0; b < mdim; ++b) out[static_cast<size_t>(a)][static_cast<size_t>(b)] = g.at({a, b});
                 return out;
             },
             py::arg("x"));

    py::class_<Lagrangian>(m, "Lagrangian")
        .def_property_readonly("dim", &Lagrangian::dim)
        .def("eval",
             [](const Lagrangian& L, const std::vector<double>& x, const std::vector<double>& v) {
                 return L.eval(std::span<const double>(x), std::span<const double>(v));
             },
             py::arg("x"), py::arg("v"))
        .def("hamiltonian",
             [](const Lagrangian& L, const std::vector<double>& x, const std::vector<double>& v) {
                 return hamiltonian(L, x, v);
             },
             py::arg("x"), py::arg("v"))
        .def("momentum",
             [](const Lagrangian& L, const std::vector<double>& x, const std::vector<double>& v) {
                 return conjugate_momentum(L, x, v);
             },
             py::arg("x"), py::arg("v"))
        .def("homogeneity_degree",
             [](const Lagrangian& L, const std::vector<double>& x, const std::vector<double>& v) {
                 return homogeneity_degree(L, x, v);
             },
             py::arg("x"), py::arg("v"))
        .def("v_hessian",
             [](const Lagrangian& L, const std::vector<double>& x, const std::vector<double>& v) {
                 const auto [M, rep] = v_hessian(L, x, v);
                 const int mdim = M.dim();
                 std::vector<std::vector<double>> out(static_cast<size_t>(mdim),
                                                      std::vector<double>(static_cast<size_t>(mdim)));
                 for (int a = 0; a < mdim; ++a)
                     for (int b = 0; b < mdim; ++b) out[static_cast<size_t>(a)][static_cast<size_t>(b)] = M.at({a, b});
                 py::dict report;
                 report["det_estimate"] = rep.det_estimate;
                 report["rank_estimate"] = rep.rank_estimate;
                 report["mv_residual"] = rep.mv_residual;
                 return py::make_tuple(out, report);
             },
             py::arg("x"), py::arg("v"));

    m.def("preset", [](const std::string& name, const py::kwargs& kwargs) {
        return make_preset(spec_from(name, kwargs));
    });

    m.def(
        "assemble_eom",
        [](const Lagrangian& L, const std::string& gauge, const std::vector<double>& x,
           const std::vector<double>& v, int order) {
            return assemble_eom(L, gauge_from(gauge, order), State{0.0, x, v});
        },
        py::arg("lagrangian"), py::arg("gauge"), py::arg("x"), py::arg("v"), py::arg("order") = 2);

    m.def(
        "integrate",
        [](const Lagrangian& L, const std::string& gauge, const std::vector<double>& x0,
           const std::vector<double>& v0, double step, int n_steps, const std::string& drift,
           int order) {
            const DriftPolicy dp =
                drift == "renormalize" ? DriftPolicy::renormalize : DriftPolicy::off;
            return trajectory_dict(
                integrate(L, gauge_from(gauge, order), State{0.0, x0, v0}, step, n_steps, dp));
        },
        py::arg("lagrangian"), py::arg("gauge"), py::arg("x0"), py::arg("v0"), py::arg("step"),
        py::arg("n_steps"), py::arg("drift") = "off", py::arg("order") = 2);

    m.def(
        "christoffel",
        [](const Preset& p, const std::vector<double>& x) {
            if (!p.metric) throw Error(ErrorCode::MissingParam, "preset has no metric field");
            const Christoffel c = christoffel(*p.metric, std::span<const double>(x));
            std::vector<std::vector<std::vector<double>>> out(
                static_cast<size_t>(c.dim),
                std::vector<std::vector<double>>(static_cast<size_t>(c.dim),
                                                 std::vector<double>(static_cast<size_t>(c.dim))));
            for (int a = 0; a < c.dim; ++a)
                for (int b = 0; b < c.dim; ++b)
                    for (int d = 0; d < c.dim; ++d) out[static_cast<size_t>(a)][static_cast<size_t>(b)][static_cast<size_t>(d)] = c.at(a, b, d);
            return out;
        },
        py::arg("preset"), py::arg("x"));

    m.def(
        "faraday",
        [](const Preset& p, const std::vector<double>& x) {
            if (!p.one_form) throw Error(ErrorCode::MissingParam, "preset has no 1-form field");
            const Mat F = faraday(*p.one_form, std::span<const double>(x));
            std::vector<std::vector<double>> out(static_cast<size_t>(F.rows),
                                                 std::vector<double>(static_cast<size_t>(F.cols)));
            for (int i = 0; i < F.rows; ++i)
                for (int j = 0; j < F.cols; ++j) out[static_cast<size_t>(i)][static_cast<size_t>(j)] = F(i, j);
            return out;
        },
        py::arg("preset"), py::arg("x"));

    m.def(
        "ansatz_accel",
        [](int n, const std::vector<double>& psi, const std::vector<double>& phi, double w,
           double v, double r) {
            const auto [dv, dw] = ansatz_accel(n, AnsatzProfiles{psi, phi}, w, v, r);
            return py::make_tuple(dv, dw);
        },
        py::arg("n"), py::arg("psi"), py::arg("phi"), py::arg("w"), py::arg("v"), py::arg("r"));

    // brane sector
    py::class_<Embedding>(m, "Embedding")
        .def_property_readonly("brane_dim", &Embedding::brane_dim)
        .def_property_readonly("target_dim", &Embedding::target_dim);

    m.def("flat_sheet", [] {
        return Embedding(2, 4, []<class T>(std::span<const T> z) {
            std::vector<T> x(4);
            x[0] = z[0];
            x[1] = z[1];
            x[2] = T{};
            x[3] = T{};
            return x;
        });
    });
    m.def(
        "cylinder",
        [](double rho) {
            return Embedding(2, 4, [rho]<class T>(std::span<const T> z) {
                using std::cos;
                using std::sin;
                constexpr double tau = 6.283185307179586;
                std::vector<T> x(4);
                x[0] = z[0];
                x[1] = cos(z[1] * tau) * rho;
                x[2] = sin(z[1] * tau) * rho;
                x[3] = T{};
                return x;
            });
        },
        py::arg("rho"));

    m.def(
        "jacobian_minors",
        [](const Embedding& e, const std::vector<double>& z) {
            const MinorsResult mr = jacobian_minors(e, std::span<const double>(z));
            return py::make_tuple(mr.values, mr.degenerate);
        },
        py::arg("embedding"), py::arg("z"));

    m.def(
        "dng_lagrangian",
        [](const Embedding& e, const std::vector<double>& z, const std::string& normalization) {
            const DngNormalization norm = normalization == "paper" ? DngNormalization::paper
                                                                   : DngNormalization::cauchy_binet;
            const DngValue d =
                dng_lagrangian(e, minkowski_metric(e.target_dim()), std::span<const double>(z), norm);
            return py::make_tuple(d.value, d.radicand_sign);
        },
        py::arg("embedding"), py::arg("z"), py::arg("normalization") = "cauchy_binet");

    m.def(
        "brane_action",
        [](const Embedding& e, int grid, int order, const std::string& normalization) {
            BraneLagrangian bl;
            bl.metric = minkowski_metric(e.target_dim());
            bl.normalization = normalization == "paper" ? DngNormalization::paper
                                                        : DngNormalization::cauchy_binet;
            return brane_action(e, bl, grid, order);
        },
        py::arg("embedding"), py::arg("grid") = 4, py::arg("order") = 8,
        py::arg("normalization") = "cauchy_binet");

    // scene runners (same engine as the CLI)
    m.def(
        "run_simulate",
        [](const std::string& scene, std::uint64_t seed, std::optional<std::string> format) {
            const RunResult r = run_simulate(scene, options_from(seed, format));
            return py::make_tuple(r.exit_code, r.payload);
        },
        py::arg("scene"), py::arg("seed") = 0, py::arg("format") = std::nullopt);
    m.def(
        "run_diagnose",
        [](const std::string& scene, std::uint64_t seed) {
            const RunResult r = run_diagnose(scene, options_from(seed, std::nullopt));
            return py::make_tuple(r.exit_code, r.payload);
        },
        py::arg("scene"), py::arg("seed") = 0);
    m.def(
        "run_brane",
        [](const std::string& scene, std::uint64_t seed) {
            const RunResult r = run_brane(scene, options_from(seed, std::nullopt));
            return py::make_tuple(r.exit_code, r.payload);
        },
        py::arg("scene"), py::arg("seed") = 0);
    m.def(
        "run_sweep",
        [](const std::string& scene, std::uint64_t seed) {
            const RunResult r = run_sweep(scene, options_from(seed, std::nullopt));
            return py::make_tuple(r.exit_code, r.payload);
        },
        py::arg("scene"), py::arg("seed") = 0);
}
