// Python bindings for the gradient-scheme elasticity core.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gse/assembly.hpp"
#include "gse/backends.hpp"
#include "gse/solver.hpp"
#include "gse/study.hpp"

namespace py = pybind11;
using namespace gse;

PYBIND11_MODULE(_gse, m) {
  m.doc() = "gradient-scheme elasticity toolkit";

  py::enum_<CellKind>(m, "CellKind").value("tri", CellKind::Tri).value("quad", CellKind::Quad);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def("mesh_size", &Mesh::mesh_size)
      .def("domain_area", &Mesh::domain_area);

  m.def(
      "unit_square",
      [](int n, CellKind kind, bool top_is_neumann) {
        return std::make_shared<Mesh>(
            generate_unit_square(n, kind, top_is_neumann ? top_neumann() : all_dirichlet()));
      },
      py::arg("n"), py::arg("kind") = CellKind::Tri, py::arg("top_is_neumann") = false);

  py::class_<IsoTensor4>(m, "IsoTensor4")
      .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
      .def_static("from_lame", &IsoTensor4::from_lame, py::arg("lam"), py::arg("mu"))
      .def_readonly("a", &IsoTensor4::a)
      .def_readonly("b", &IsoTensor4::b)
      .def("sqrt", &IsoTensor4::sqrt)
      .def("compose", &IsoTensor4::compose)
      .def("voigt", &IsoTensor4::voigt);

  py::class_<GradientDiscretisation>(m, "GradientDiscretisation")
      .def_readonly("dof_count", &GradientDiscretisation::dof_count)
      .def_readonly("descriptor", &GradientDiscretisation::descriptor);

  py::class_<BackendSpec>(m, "BackendSpec")
      .def(py::init<>())
      .def_readwrite("name", &BackendSpec::name)
      .def_readwrite("huw_space", &BackendSpec::huw_space)
      .def_readwrite("theta", &BackendSpec::theta)
      .def_readwrite("cr_allow_mixed", &BackendSpec::cr_allow_mixed)
      .def_readwrite("D_lambda", &BackendSpec::D_lambda)
      .def_readwrite("D_mu", &BackendSpec::D_mu);

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("backend", &ConvergenceRow::backend)
      .def_readonly("n", &ConvergenceRow::n)
      .def_readonly("h", &ConvergenceRow::h)
      .def_readonly("dofs", &ConvergenceRow::dofs)
      .def_readonly("errH1", &ConvergenceRow::errH1)
      .def_readonly("errL2", &ConvergenceRow::errL2)
      .def_readonly("S", &ConvergenceRow::S)
      .def_readonly("W", &ConvergenceRow::W)
      .def_readonly("C", &ConvergenceRow::C)
      .def_readonly("K", &ConvergenceRow::K)
      .def_readonly("eocH1", &ConvergenceRow::eocH1)
      .def_readonly("eocL2", &ConvergenceRow::eocL2)
      .def_readonly("has_eoc", &ConvergenceRow::has_eoc)
      .def_readonly("bound_ok", &ConvergenceRow::bound_ok);

  m.def(
      "solve_case",
      [](const std::string& backend, const std::string& case_name, int n, double lam, double mu) {
        BackendSpec spec;
        spec.name = backend;
        const ManufacturedCase mc = builtin_case(case_name, lam, mu);
        auto mesh = std::make_shared<const Mesh>(
            generate_unit_square(n, backend_mesh_kind(spec), mc.tagging));
        const GradientDiscretisation gd = build_backend(mesh, spec, lam, mu);
        const GramSet gs = gram_set(gd);
        const Vec b = assemble_rhs(gd, mc.F, mc.g);
        Vec u;
        if (mc.linear) {
          u = solve_spd(assemble_stiffness(gd, mc.law.stiffness(0)), b).x;
        } else {
          const NonlinearResult nr = solve_nonlinear(gd, gs, mc.law, b);
          if (!nr.converged) throw std::runtime_error("Picard iteration did not converge");
          u = nr.u;
        }
        const auto [h1, l2] = error_norms(gd, u, mc);
        py::dict out;
        out["u"] = u;
        out["dofs"] = gd.dof_count;
        out["errH1"] = h1;
        out["errL2"] = l2;
        out["C"] = coercivity_C(gd, gs);
        out["K"] = korn_K(gd, gs);
        return out;
      },
      py::arg("backend"), py::arg("case"), py::arg("n"), py::arg("lam") = 1.0,
      py::arg("mu") = 1.0);

  m.def(
      "indicators",
      [](const std::string& backend, const std::string& case_name, int n, double lam, double mu) {
        BackendSpec spec;
        spec.name = backend;
        const ManufacturedCase mc = builtin_case(case_name, lam, mu);
        auto mesh = std::make_shared<const Mesh>(
            generate_unit_square(n, backend_mesh_kind(spec), mc.tagging));
        const GradientDiscretisation gd = build_backend(mesh, spec, lam, mu);
        const GramSet gs = gram_set(gd);
        const VectorField F = mc.F;
        py::dict out;
        out["S"] = consistency_S(gd, gs, mc.u, mc.grad_u);
        out["W"] = limitconformity_W(
            gd, gs, {mc.stress, [F](const Eigen::Vector2d& x) { return Eigen::Vector2d(-F(x)); }});
        out["C"] = coercivity_C(gd, gs);
        out["K"] = korn_K(gd, gs);
        return out;
      },
      py::arg("backend"), py::arg("case"), py::arg("n"), py::arg("lam") = 1.0,
      py::arg("mu") = 1.0);

  m.def("convergence_study",
        [](const BackendSpec& spec, const std::string& case_name, const std::vector<int>& n_list,
           double lam, double mu) {
          return convergence_study(spec, builtin_case(case_name, lam, mu), n_list);
        },
        py::arg("spec"), py::arg("case"), py::arg("n_list"), py::arg("lam") = 1.0,
        py::arg("mu") = 1.0);

  m.def("study_csv", &study_csv);

  m.def(
      "check_law",
      [](const std::string& name, int samples, uint64_t seed, double lam, double mu) {
        const ManufacturedCase mc = builtin_case(name, lam, mu);
        const HypothesisReport rep = check_hypotheses(mc.law, samples, seed);
        py::dict out;
        out["samples"] = rep.samples;
        out["growth_violations"] = rep.growth_violations;
        out["coercivity_violations"] = rep.coercivity_violations;
        out["monotonicity_violations"] = rep.monotonicity_violations;
        out["ok"] = rep.ok();
        return out;
      },
      py::arg("case"), py::arg("samples") = 10000, py::arg("seed") = 12345,
      py::arg("lam") = 1.0, py::arg("mu") = 1.0);
}
