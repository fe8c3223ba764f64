#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sparsedom/maximal.hpp"
#include "sparsedom/rdf.hpp"
#include "sparsedom/verify.hpp"
#include "sparsedom/weights.hpp"

namespace py = pybind11;
using namespace sparsedom;

namespace {

GridFunction make_function(const DyadicGrid& grid, py::array_t<double> values,
                           bool weight) {
  auto buf = values.request();
  const double* data = static_cast<const double*>(buf.ptr);
  return GridFunction(grid, std::vector<double>(data, data + buf.size), weight);
}

py::array_t<double> values_array(const GridFunction& f) {
  py::array_t<double> out(py::ssize_t(f.size()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::dict report_dict(const VerificationReport& rep) {
  py::dict d;
  d["id"] = rep.id;
  d["lhs"] = rep.lhs;
  d["rhs"] = rep.rhs;
  d["ratio"] = rep.ratio;
  d["bound"] = rep.bound ? py::object(py::float_(*rep.bound)) : py::none();
  d["pass"] = rep.pass;
  py::dict params;
  for (const auto& [k, v] : rep.params) params[k.c_str()] = v;
  d["params"] = params;
  py::dict extra;
  for (const auto& [k, v] : rep.extra) extra[k.c_str()] = v;
  d["extra"] = extra;
  d["instance"] = rep.instance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sparsedom, m) {
  m.doc() = "Dyadic sparse operators, Orlicz maximal functions and weight constants";

  py::register_exception<Error>(m, "SparsedomError");

  py::class_<Cube>(m, "Cube")
      .def(py::init<>())
      .def_readwrite("level", &Cube::level)
      .def_property(
          "index",
          [](const Cube& q) { return py::make_tuple(q.idx[0], q.idx[1], q.idx[2]); },
          [](Cube& q, py::sequence seq) {
            for (int d = 0; d < 3 && d < py::ssize_t(py::len(seq)); ++d)
              q.idx[d] = seq[d].cast<std::uint32_t>();
          })
      .def("__repr__", [](const Cube& q) {
        return "Cube(level=" + std::to_string(q.level) + ", index=(" +
               std::to_string(q.idx[0]) + "," + std::to_string(q.idx[1]) + "," +
               std::to_string(q.idx[2]) + "))";
      });

  py::class_<DyadicGrid>(m, "DyadicGrid")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("depth"))
      .def(py::init([](int dim, int depth, std::vector<double> origin, double side) {
             std::array<double, 3> o{0, 0, 0};
             for (std::size_t d = 0; d < origin.size() && d < 3; ++d) o[d] = origin[d];
             return DyadicGrid(dim, depth, o, side);
           }),
           py::arg("dim"), py::arg("depth"), py::arg("origin"), py::arg("side"))
      .def_property_readonly("dim", &DyadicGrid::dim)
      .def_property_readonly("depth", &DyadicGrid::depth)
      .def_property_readonly("side", &DyadicGrid::side)
      .def_property_readonly("cell_count", &DyadicGrid::cell_count)
      .def("cube_at", &DyadicGrid::cube_at)
      .def("__eq__", [](const DyadicGrid& a, const DyadicGrid& b) { return a == b; });

  py::class_<GridFunction>(m, "GridFunction")
      .def(py::init(&make_function), py::arg("grid"), py::arg("values"),
           py::arg("weight") = false)
      .def_static("constant", &GridFunction::constant, py::arg("grid"),
                  py::arg("value"), py::arg("weight") = false)
      .def_property_readonly("grid", &GridFunction::grid)
      .def_property_readonly("values", &values_array)
      .def_property_readonly("is_weight", &GridFunction::is_weight);

  m.def("cells", &cells, py::arg("grid"), py::arg("level"));
  m.def("average", &average, py::arg("f"), py::arg("cube"));
  m.def("integrate", py::overload_cast<const GridFunction&>(&integrate));
  m.def("integrate",
        py::overload_cast<const GridFunction&, const GridFunction&>(&integrate));
  m.def("read_function", py::overload_cast<const std::string&>(&read_function));
  m.def("write_function",
        py::overload_cast<const GridFunction&, const std::string&>(&write_function));

  py::class_<YoungFunction>(m, "YoungFunction")
      .def_static("parse", &YoungFunction::parse)
      .def("__call__", &YoungFunction::evaluate)
      .def("evaluate", &YoungFunction::evaluate)
      .def("inverse", &YoungFunction::inverse)
      .def("derivative", &YoungFunction::derivative)
      .def_property_readonly("spec", &YoungFunction::spec)
      .def("__repr__", [](const YoungFunction& a) { return "Young(" + a.spec() + ")"; });
  m.def("conjugate", &conjugate);

  py::class_<LuxemburgResult>(m, "LuxemburgResult")
      .def_readonly("value", &LuxemburgResult::value)
      .def_readonly("iterations", &LuxemburgResult::iterations)
      .def_readonly("bracket_width", &LuxemburgResult::bracket_width);
  m.def("luxemburg_norm",
        py::overload_cast<const GridFunction&, const Cube&, const YoungFunction&>(
            &luxemburg_norm));
  m.def("alpha_p", &alpha_p);
  m.def("beta_p", &beta_p);
  m.def("holder_kappa",
        py::overload_cast<const YoungFunction&, const YoungFunction&,
                          const YoungFunction&>(&holder_kappa));

  py::class_<MaximalResult>(m, "MaximalResult")
      .def_readonly("output", &MaximalResult::output)
      .def_readonly("op", &MaximalResult::op)
      .def_readonly("argmax_level", &MaximalResult::argmax_level);
  m.def("dyadic_maximal", &dyadic_maximal);
  m.def("orlicz_maximal", &orlicz_maximal);

  py::class_<SparseFamily>(m, "SparseFamily")
      .def(py::init([](const DyadicGrid& g, std::vector<Cube> cubes) {
             return SparseFamily(g, std::move(cubes));
           }),
           py::arg("grid"), py::arg("cubes"))
      .def_property_readonly("size", &SparseFamily::size)
      .def_property_readonly("cubes", [](const SparseFamily& s) {
        std::vector<Cube> out;
        for (const auto& sc : s.members()) out.push_back(sc.cube);
        return out;
      });
  m.def("is_sparse", [](const SparseFamily& s) {
    const SparseCheck c = is_sparse(s);
    return py::make_tuple(c.ok, c.violation);
  });
  m.def("apply_sparse", &apply_sparse);
  m.def("sparse_from_cz", &sparse_from_cz);
  m.def("carleson_constant", [](const SparseFamily& s, const GridFunction& w) {
    return carleson_constant(s, w).constant;
  });

  py::class_<CZDecomposition>(m, "CZDecomposition")
      .def_readonly("cubes", &CZDecomposition::cubes)
      .def_readonly("averages", &CZDecomposition::averages)
      .def_readonly("good", &CZDecomposition::good)
      .def_readonly("bad", &CZDecomposition::bad)
      .def_readonly("lambda_", &CZDecomposition::lambda);
  m.def("cz_decompose", &cz_decompose);

  m.def("a1_constant", [](const GridFunction& w) { return a1_constant(w).value; });
  m.def("ap_constant",
        [](const GridFunction& w, double p) { return ap_constant(w, p).value; });
  m.def("ainfty_constant",
        [](const GridFunction& w) { return ainfty_constant(w).value; });

  py::class_<RdFResult>(m, "RdFResult")
      .def_readonly("majorant", &RdFResult::majorant)
      .def_readonly("truncation", &RdFResult::truncation)
      .def_readonly("norm_h", &RdFResult::norm_h)
      .def_readonly("norm_r", &RdFResult::norm_r)
      .def_readonly("a1_of_majorant", &RdFResult::a1_of_majorant);
  m.def("rdf_build", &rdf_build, py::arg("h"), py::arg("v"), py::arg("s"),
        py::arg("tol") = 1e-10);

  m.def("lp_norm", py::overload_cast<const GridFunction&, double>(&lp_norm));
  m.def("lp_norm",
        py::overload_cast<const GridFunction&, const GridFunction&, double>(&lp_norm));
  m.def("weak_norm", &weak_norm);

  m.def("verify_lemma41", [](const GridFunction& f, const GridFunction& w,
                             const SparseFamily& s) {
    return report_dict(verify_lemma41(f, w, s));
  });
  m.def("verify_fs", [](const GridFunction& f, const GridFunction& w) {
    return report_dict(verify_fs(f, w));
  });
  m.def("verify_endpoint", [](const GridFunction& f, const GridFunction& w, double eps,
                              const SparseFamily& s) {
    return report_dict(verify_endpoint(f, w, eps, s));
  });
  m.def("family_for", &family_for);
}
