#include <cmath>

#include "emsim/io.hpp"
#include "emsim/postdsl.hpp"

namespace emsim::post {

using solver::cplx;

namespace {

struct Value {
  bool vector = false;
  std::array<cplx, 3> c{};  // scalar lives in c[0]
};

struct PointContext {
  cplx a_z;
  cplx u;  // grad v = e_z u inside a conductor
  cplx bx, by;
  double sigma = 0.0;
  double nu = 0.0;
  double omega = 0.0;
};

Value scalar(cplx v) { return {false, {v, 0.0, 0.0}}; }

[[noreturn]] void kind_error(const FieldExpr& e) {
  throw EvalError("expression does not kind-check: " + to_string(e));
}

Value eval(const FieldExpr& e, const PointContext& p) {
  switch (e.kind) {
    case FieldExpr::Kind::Number:
      return scalar(e.number);
    case FieldExpr::Kind::Field:
      if (e.name == "a") return {true, {0.0, 0.0, p.a_z}};
      if (e.name == "grad_phi") return {true, {0.0, 0.0, p.u}};
      if (e.name == "d a") return {true, {p.bx, p.by, 0.0}};
      throw EvalError("field {" + e.name + "} is not available");
    case FieldExpr::Kind::Call: {
      if (e.name == "sigma") return scalar(p.sigma);
      if (e.name == "nu") return scalar(p.nu);
      if (e.name == "Dt" && e.args.size() == 1) {
        Value v = eval(e.args[0], p);
        for (auto& c : v.c) c *= cplx(0.0, p.omega);
        return v;
      }
      if (e.name == "Norm" && e.args.size() == 1) {
        const Value v = eval(e.args[0], p);
        return scalar(std::sqrt(std::norm(v.c[0]) + std::norm(v.c[1]) + std::norm(v.c[2])));
      }
      throw EvalError("unknown function " + e.name + "[]");
    }
    case FieldExpr::Kind::Negate: {
      Value v = eval(e.args[0], p);
      for (auto& c : v.c) c = -c;
      return v;
    }
    case FieldExpr::Kind::Binary: {
      const Value l = eval(e.args[0], p);
      const Value r = eval(e.args[1], p);
      Value out;
      switch (e.op) {
        case '+':
        case '-': {
          if (l.vector != r.vector) kind_error(e);
          out.vector = l.vector;
          const double s = e.op == '+' ? 1.0 : -1.0;
          for (std::size_t i = 0; i < 3; ++i) out.c[i] = l.c[i] + s * r.c[i];
          return out;
        }
        case '*':
          if (l.vector && r.vector) kind_error(e);
          if (!l.vector && !r.vector) return scalar(l.c[0] * r.c[0]);
          out.vector = true;
          for (std::size_t i = 0; i < 3; ++i) out.c[i] = l.vector ? l.c[i] * r.c[0] : l.c[0] * r.c[i];
          return out;
        case '/':
          if (r.vector) kind_error(e);
          out = l;
          for (auto& c : out.c) c /= r.c[0];
          return out;
        case '^': {
          if (l.vector || r.vector) kind_error(e);
          const cplx b = l.c[0];
          const cplx x = r.c[0];
          // stay real where the real power is defined, e.g. Norm[..]^2
          if (b.imag() == 0.0 && x.imag() == 0.0 && (b.real() >= 0.0 || x.real() == std::round(x.real())))
            return scalar(std::pow(b.real(), x.real()));
          return scalar(std::pow(b, x));
        }
      }
      kind_error(e);
    }
  }
  kind_error(e);
}

bool uses(const FieldExpr& e, std::string_view fn) {
  if (e.kind == FieldExpr::Kind::Call && e.name == fn) return true;
  for (const auto& a : e.args)
    if (uses(a, fn)) return true;
  return false;
}

bool tag_in_region(const std::string& region, int tag, const mesh::TriMesh& mesh) {
  const int n = mesh.conductor_count();
  if (region == "Omega") return true;
  if (region == "Omega_c") return tag >= 1 && tag <= n;
  if (region == "Omega_i") return tag == n + 1;
  const auto it = mesh.groups.find(region);
  return it != mesh.groups.end() && it->second == tag && tag != mesh.boundary_tag();
}

std::vector<char> region_mask(const std::vector<std::string>& regions, const mesh::TriMesh& mesh) {
  std::vector<char> mask(mesh.triangles.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    for (const auto& r : regions)
      if (tag_in_region(r, mesh.triangles[t].tag, mesh)) mask[t] = 1;
  return mask;
}

struct ElementEval {
  const FieldExpr& expr;
  const solver::SolveResult& result;
  const solver::FEProblem& problem;
  const solver::ElementFields& fields;

  std::array<cplx, 3> operator()(std::size_t t) const {
    const auto& tri = problem.mesh.triangles[t];
    const int c = problem.conductor_of_tag(tri.tag);
    PointContext p;
    p.u = c >= 0 ? result.u[static_cast<std::size_t>(c)] : cplx(0.0);
    p.bx = fields.bx[t];
    p.by = fields.by[t];
    p.sigma = problem.sigma_of_tag(tri.tag);
    p.nu = problem.material.reluctivity;
    p.omega = problem.excitation.angular_frequency();
    std::array<cplx, 3> sum{};
    for (std::size_t k = 0; k < 3; ++k) {
      // edge midpoints: exact for quadratics in the linear A_z
      p.a_z = 0.5 * (result.a_z[static_cast<std::size_t>(tri.v[k])] +
                     result.a_z[static_cast<std::size_t>(tri.v[(k + 1) % 3])]);
      const Value v = eval(expr, p);
      for (std::size_t i = 0; i < 3; ++i) sum[i] += v.c[i];
    }
    for (auto& s : sum) s /= 3.0;
    return sum;
  }
};

QuantityField prepare(const PostQuantity& q, const solver::FEProblem& problem) {
  QuantityField f;
  f.name = q.name;
  f.in_region = region_mask(q.regions, problem.mesh);
  f.values.assign(problem.mesh.triangles.size(), {});
  if (uses(q.expr, "sigma")) {
    bool conductive = false;
    for (std::size_t t = 0; t < f.in_region.size(); ++t)
      conductive = conductive || (f.in_region[t] && problem.sigma_of_tag(problem.mesh.triangles[t].tag) > 0.0);
    if (!conductive) throw EvalError("sigma[] in " + q.name + " but its region has no conductor");
  }
  // kind check once, on a neutral point
  f.vector = eval(q.expr, PointContext{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}).vector;
  return f;
}

template <bool Parallel>
std::vector<QuantityField> evaluate_impl(const PostProgram& program, const solver::SolveResult& result,
                                         const solver::FEProblem& problem) {
  const auto fields = Parallel ? solver::derive_fields(result, problem)
                               : solver::derive_fields_serial(result, problem);
  std::vector<QuantityField> out;
  for (const auto& b : program.processings) {
    for (const auto& q : b.quantities) {
      QuantityField f = prepare(q, problem);
      const ElementEval ev{q.expr, result, problem, fields};
      const auto n = static_cast<std::int64_t>(f.values.size());
      if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
        for (std::int64_t t = 0; t < n; ++t)
          if (f.in_region[static_cast<std::size_t>(t)])
            f.values[static_cast<std::size_t>(t)] = ev(static_cast<std::size_t>(t));
      } else {
        for (std::int64_t t = 0; t < n; ++t)
          if (f.in_region[static_cast<std::size_t>(t)])
            f.values[static_cast<std::size_t>(t)] = ev(static_cast<std::size_t>(t));
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace

std::vector<QuantityField> evaluate_post(const PostProgram& program, const solver::SolveResult& result,
                                         const solver::FEProblem& problem) {
  return evaluate_impl<true>(program, result, problem);
}

std::vector<QuantityField> evaluate_post_serial(const PostProgram& program,
                                                const solver::SolveResult& result,
                                                const solver::FEProblem& problem) {
  return evaluate_impl<false>(program, result, problem);
}

std::vector<NamedArray> quantity_arrays(const QuantityField& q) {
  const std::size_t n = q.values.size();
  std::vector<NamedArray> out;
  if (!q.vector) {
    bool real = true;
    for (const auto& v : q.values) real = real && v[0].imag() == 0.0;
    if (real) {
      NamedArray a{q.name, std::vector<double>(n)};
      for (std::size_t t = 0; t < n; ++t) a.values[t] = q.values[t][0].real();
      return {a};
    }
    NamedArray re{q.name + "_re", std::vector<double>(n)}, im{q.name + "_im", std::vector<double>(n)},
        ab{q.name + "_abs", std::vector<double>(n)};
    for (std::size_t t = 0; t < n; ++t) {
      re.values[t] = q.values[t][0].real();
      im.values[t] = q.values[t][0].imag();
      ab.values[t] = std::abs(q.values[t][0]);
    }
    return {re, im, ab};
  }
  static const char* comp[] = {"x", "y", "z"};
  for (std::size_t i = 0; i < 3; ++i) {
    NamedArray re{q.name + "_" + comp[i] + "_re", std::vector<double>(n)};
    NamedArray im{q.name + "_" + comp[i] + "_im", std::vector<double>(n)};
    for (std::size_t t = 0; t < n; ++t) {
      re.values[t] = q.values[t][i].real();
      im.values[t] = q.values[t][i].imag();
    }
    out.push_back(std::move(re));
    out.push_back(std::move(im));
  }
  NamedArray ab{q.name + "_abs", std::vector<double>(n)};
  for (std::size_t t = 0; t < n; ++t)
    ab.values[t] = std::sqrt(std::norm(q.values[t][0]) + std::norm(q.values[t][1]) + std::norm(q.values[t][2]));
  out.push_back(std::move(ab));
  return out;
}

std::filesystem::path confined_print_path(const PrintSpec& print) {
  std::filesystem::path p(print.file.empty() ? "Results/" + print.quantity + ".vtk" : print.file);
  if (p.is_absolute() || p.has_root_name() || p.has_root_directory())
    throw EvalError("print path " + print.file + " must be relative to the session directory");
  for (const auto& part : p)
    if (part == "..") throw EvalError("print path " + print.file + " leaves the session directory");
  p = p.lexically_normal();
  if (p.empty() || !p.has_filename() || p.filename() == ".")
    throw EvalError("print path '" + print.file + "' names no file");
  if (*p.begin() != "Results") p = std::filesystem::path("Results") / p;
  p.replace_extension(".vtk");
  return p;
}

std::vector<std::filesystem::path> write_artifacts(const PostProgram& program,
                                                   const std::vector<QuantityField>& fields,
                                                   const solver::FEProblem& problem,
                                                   const std::filesystem::path& session_dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& op : program.operations) {
    for (const auto& pr : op.prints) {
      const QuantityField* q = nullptr;
      for (const auto& f : fields)
        if (f.name == pr.quantity) q = &f;
      if (!q) throw EvalError("Print of unevaluated quantity " + pr.quantity);
      const auto rel = confined_print_path(pr);
      const auto on = region_mask({pr.region}, problem.mesh);
      std::vector<io::CellArray> arrays;
      for (auto& a : quantity_arrays(*q)) {
        for (std::size_t t = 0; t < a.values.size(); ++t)
          if (!on[t]) a.values[t] = 0.0;
        arrays.push_back({a.name, std::move(a.values)});
      }
      const std::string title = pr.label.empty() ? pr.quantity : pr.label;
      io::write_file_atomic(session_dir / rel, io::mesh_to_vtk(problem.mesh, arrays, title));
      auto j = io::fields_to_json(problem.mesh, arrays);
      j["quantity"] = pr.quantity;
      j["label"] = pr.label;
      j["region"] = pr.region;
      auto json_rel = rel;
      json_rel.replace_extension(".json");
      io::write_file_atomic(session_dir / json_rel, j.dump());
      written.push_back(rel);
      written.push_back(json_rel);
    }
  }
  return written;
}

}  // namespace emsim::post
