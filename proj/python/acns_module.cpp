#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "acns/harness.hpp"
#include "acns/operators.hpp"

namespace py = pybind11;
using namespace acns;

namespace {

// copy non-ghost nodes into a numpy array (C order, axes x,y[,z])
py::array_t<double> field_to_numpy(const ScalarField& f) {
    const int dim = f.grid().dim;
    std::vector<py::ssize_t> shape;
    for (int a = 0; a < dim; ++a) shape.push_back(f.nn(a));
    py::array_t<double> out(shape);
    auto r = out.mutable_unchecked<>();
    if (dim == 2) {
        for (int i = 0; i < f.nn(0); ++i)
            for (int j = 0; j < f.nn(1); ++j) r(i, j) = f(i, j);
    } else {
        for (int i = 0; i < f.nn(0); ++i)
            for (int j = 0; j < f.nn(1); ++j)
                for (int k = 0; k < f.nn(2); ++k) r(i, j, k) = f(i, j, k);
    }
    return out;
}

void numpy_to_field(py::array_t<double, py::array::c_style | py::array::forcecast> a,
                    ScalarField& f) {
    const int dim = f.grid().dim;
    if (a.ndim() != dim) throw SpecError("array rank does not match grid dim");
    for (int ax = 0; ax < dim; ++ax)
        if (a.shape(ax) != f.nn(ax)) throw SpecError("array shape does not match field");
    auto r = a.unchecked<>();
    if (dim == 2) {
        for (int i = 0; i < f.nn(0); ++i)
            for (int j = 0; j < f.nn(1); ++j) f(i, j) = r(i, j);
    } else {
        for (int i = 0; i < f.nn(0); ++i)
            for (int j = 0; j < f.nn(1); ++j)
                for (int k = 0; k < f.nn(2); ++k) f(i, j, k) = r(i, j, k);
    }
}

StudySpec make_spec(const py::kwargs& kw) {
    StudySpec s;
    for (auto item : kw) {
        const std::string key = py::str(item.first);
        if (key == "scheme") s.scheme = scheme_from_string(py::cast<std::string>(item.second));
        else if (key == "dim") s.dim = py::cast<int>(item.second);
        else if (key == "nx") s.nx = py::cast<int>(item.second);
        else if (key == "dts") s.dts = py::cast<std::vector<double>>(item.second);
        else if (key == "t_final") s.t_final = py::cast<double>(item.second);
        else if (key == "nu") s.nu = py::cast<double>(item.second);
        else if (key == "chi") s.chi = py::cast<double>(item.second);
        else if (key == "lam") s.lambda = py::cast<double>(item.second);
        else if (key == "nonlinear") s.nonlinear = py::cast<bool>(item.second);
        else if (key == "case_id") s.case_id = py::cast<std::string>(item.second);
        else if (key == "reference")
            s.reference = py::cast<std::string>(item.second) == "analytic" ? RefMode::Analytic
                                                                           : RefMode::FineDt;
        else if (key == "seed") s.seed = py::cast<uint64_t>(item.second);
        else if (key == "solver_tol") s.solver_tol = py::cast<double>(item.second);
        else if (key == "steps") s.stability_steps = py::cast<int>(item.second);
        else if (key == "zero_walltime") s.zero_walltime = py::cast<bool>(item.second);
        else throw SpecError("unknown StudySpec field: " + key);
    }
    if (s.case_id == "mms2d" && s.dim == 3) s.case_id = "mms3d";
    return s;
}

} // namespace

PYBIND11_MODULE(_acns, m) {
    m.doc() = "MAC-grid artificial-compressibility Stokes/Navier-Stokes solvers";

    py::register_exception<SpecError>(m, "SpecError");

    py::class_<MacGrid>(m, "MacGrid")
        .def(py::init([](int dim, int nx) { return MacGrid(dim, {nx, nx, nx}); }),
             py::arg("dim"), py::arg("nx"))
        .def_readonly("dim", &MacGrid::dim)
        .def_property_readonly("n", [](const MacGrid& g) {
            return std::vector<int>(g.n.begin(), g.n.begin() + g.dim);
        })
        .def_property_readonly("h", [](const MacGrid& g) {
            return std::vector<double>(g.h.begin(), g.h.begin() + g.dim);
        });

    py::enum_<Loc>(m, "Loc")
        .value("Cell", Loc::Cell)
        .value("FaceX", Loc::FaceX)
        .value("FaceY", Loc::FaceY)
        .value("FaceZ", Loc::FaceZ);

    py::class_<ScalarField>(m, "ScalarField")
        .def(py::init<const MacGrid&, Loc>())
        .def_property_readonly("loc", &ScalarField::loc)
        .def("to_numpy", &field_to_numpy)
        .def("from_numpy",
             [](ScalarField& f,
                py::array_t<double, py::array::c_style | py::array::forcecast> a) {
                 numpy_to_field(a, f);
             });

    py::class_<VelocityField>(m, "VelocityField")
        .def(py::init<const MacGrid&>())
        .def("component",
             [](VelocityField& u, int k) -> ScalarField& { return u[k]; },
             py::return_value_policy::reference_internal)
        .def("to_numpy", [](const VelocityField& u) {
            py::list out;
            for (int k = 0; k < u.dim(); ++k) out.append(field_to_numpy(u[k]));
            return out;
        });

    m.def("divergence", &divergence);
    m.def("gradient", &gradient);
    m.def("advect", &advect);
    m.def("l2_norm", py::overload_cast<const ScalarField&>(&l2_norm));
    m.def("l2_norm_vec", py::overload_cast<const VelocityField&>(&l2_norm));
    m.def("lemma_identity", &lemma_identity);

    py::class_<AnalyticCase>(m, "AnalyticCase")
        .def_static("by_id", &AnalyticCase::by_id)
        .def_readonly("dim", &AnalyticCase::dim)
        .def("u", [](const AnalyticCase& c, int k, double x, double y, double z, double t) {
            return c.u(k, x, y, z, t);
        })
        .def("p", [](const AnalyticCase& c, double x, double y, double z, double t) {
            return c.p(x, y, z, t);
        });
    m.def("sample_velocity", &sample_velocity);
    m.def("sample_pressure", &sample_pressure);
    m.def("forcing_stokes", &forcing_stokes);
    m.def("forcing_ns", &forcing_ns);

    py::class_<ErrorTriple>(m, "ErrorTriple")
        .def_readonly("err_u", &ErrorTriple::err_u)
        .def_readonly("err_p", &ErrorTriple::err_p)
        .def_readonly("err_div", &ErrorTriple::err_div);
    m.def("evaluate_errors", &evaluate_errors, py::arg("u"), py::arg("p"), py::arg("case"),
          py::arg("t"), py::arg("mean_adjust") = true);

    py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
        .def_readonly("kinetic", &EnergyBreakdown::kinetic)
        .def_readonly("pressure", &EnergyBreakdown::pressure)
        .def_readonly("seminorm", &EnergyBreakdown::seminorm)
        .def_readonly("heuristic", &EnergyBreakdown::heuristic)
        .def_property_readonly("directional", [](const EnergyBreakdown& e) {
            return std::vector<double>(e.directional.begin(), e.directional.end());
        })
        .def("total", &EnergyBreakdown::total);

    m.def("convergence_study", [](const py::kwargs& kw) {
        const ErrorReport rep = run_convergence(make_spec(kw));
        py::list rows;
        for (const auto& r : rep.rows) {
            py::dict d;
            d["dt"] = r.dt;
            d["err_u"] = r.err_u;
            d["err_p"] = r.err_p;
            d["err_div"] = r.err_div;
            if (r.order_u) d["order_u"] = *r.order_u;
            if (r.order_p) d["order_p"] = *r.order_p;
            if (r.order_div) d["order_div"] = *r.order_div;
            d["diverged"] = r.diverged;
            rows.append(d);
        }
        return rows;
    });

    m.def("convergence_csv", [](const py::kwargs& kw) {
        return csv_string(run_convergence(make_spec(kw)));
    });

    m.def("stability_trace", [](const py::kwargs& kw) {
        StudySpec s = make_spec(kw);
        if (s.dts.size() != 1) throw SpecError("stability_trace needs dts=[one value]");
        const StabilityResult res = run_stability(s, s.dts[0], s.stability_steps);
        py::dict d;
        py::list totals;
        for (const auto& row : res.trace) totals.append(row.e.total());
        d["totals"] = totals;
        d["monotone"] = res.monotone;
        d["worst_increase"] = res.worst_increase;
        d["heuristic"] = res.heuristic;
        return d;
    });
}
