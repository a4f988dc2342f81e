#include "emsim/io.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace emsim::io {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(tid % 100000) + "_" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp, ec);
      throw FileError("short write to " + path.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw FileError("cannot rename into " + path.string());
  }
}

json layout_to_json(const geometry::ConductorLayout& layout) {
  json centers = json::array();
  for (const auto& c : layout.centers) centers.push_back({c.x, c.y});
  return {{"radius_m", layout.radius_m},
          {"boundary_margin_m", layout.boundary_margin_m},
          {"centers", centers}};
}

geometry::ConductorLayout layout_from_json(const json& j) {
  geometry::ConductorLayout l;
  try {
    if (!j.is_object()) throw geometry::GeometryError("layout must be a JSON object");
    if (j.contains("radius_m")) l.radius_m = j.at("radius_m").get<double>();
    if (j.contains("boundary_margin_m")) l.boundary_margin_m = j.at("boundary_margin_m").get<double>();
    const auto& cs = j.at("centers");
    if (!cs.is_array()) throw geometry::GeometryError("centers must be an array");
    for (const auto& c : cs) {
      if (!c.is_array() || c.size() != 2)
        throw geometry::GeometryError("each center must be [x, y]");
      l.centers.push_back({c[0].get<double>(), c[1].get<double>()});
    }
  } catch (const json::exception& e) {
    throw geometry::GeometryError(std::string("bad layout JSON: ") + e.what());
  }
  return l;
}

json mesh_to_json(const mesh::TriMesh& m) {
  json nodes = json::array();
  for (const auto& p : m.nodes) nodes.push_back({p.x, p.y});
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back({t.v[0], t.v[1], t.v[2], t.tag});
  json edges = json::array();
  for (const auto& e : m.boundary_edges) edges.push_back({e.v[0], e.v[1], e.tag});
  json groups = json::object();
  for (const auto& [name, tag] : m.groups) groups[name] = tag;
  return {{"nodes", nodes}, {"triangles", tris}, {"boundary_edges", edges}, {"groups", groups}};
}

mesh::TriMesh mesh_from_json(const json& j) {
  mesh::TriMesh m;
  try {
    for (const auto& p : j.at("nodes")) m.nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto& t : j.at("triangles"))
      m.triangles.push_back({{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()},
                             t.at(3).get<int>()});
    for (const auto& e : j.at("boundary_edges"))
      m.boundary_edges.push_back({{e.at(0).get<int>(), e.at(1).get<int>()}, e.at(2).get<int>()});
    for (const auto& [name, tag] : j.at("groups").items()) m.groups[name] = tag.get<int>();
  } catch (const json::exception& e) {
    throw FileError(std::string("bad mesh JSON: ") + e.what());
  }
  const auto n = static_cast<int>(m.nodes.size());
  for (const auto& t : m.triangles)
    for (int v : t.v)
      if (v < 0 || v >= n) throw FileError("mesh JSON: node index out of range");
  return m;
}

namespace {

json complex_pair(solver::cplx z) { return {z.real(), z.imag()}; }

}  // namespace

json solution_to_json(const solver::SolveResult& r, const solver::FEProblem& pb,
                      const std::vector<solver::ConductorReport>& report) {
  json a = json::array();
  for (const auto& z : r.a_z) a.push_back(complex_pair(z));
  json u = json::array();
  for (const auto& z : r.u) u.push_back(complex_pair(z));
  json conductors = json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < report.size(); ++i) {
    const auto& c = report[i];
    total += c.loss;
    conductors.push_back({{"index", i + 1},
                          {"current_A", complex_pair(c.current)},
                          {"imposed_current_A", complex_pair(pb.currents[i])},
                          {"u_V_per_m", complex_pair(c.voltage)},
                          {"loss_W_per_m", c.loss},
                          {"area_m2", c.area},
                          {"loss_density_min", c.loss_density_min},
                          {"loss_density_max", c.loss_density_max},
                          {"loss_density_mean", c.loss_density_mean}});
  }
  return {{"frequency_Hz", pb.excitation.frequency_Hz},
          {"conductivity_S_per_m", pb.material.conductivity_S_per_m},
          {"dof_count", r.dof_count},
          {"residual_norm", r.residual_norm},
          {"total_loss_W_per_m", total},
          {"terminal_power_W_per_m", solver::terminal_power(r, pb)},
          {"conductors", conductors},
          {"u", u},
          {"a_z", a}};
}

std::string mesh_to_vtk(const mesh::TriMesh& m, const std::vector<CellArray>& arrays,
                        std::string_view title) {
  std::ostringstream os;
  os.precision(17);
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.nodes.size() << " double\n";
  for (const auto& p : m.nodes) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << m.triangles.size() << ' ' << 4 * m.triangles.size() << '\n';
  for (const auto& t : m.triangles) os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << m.triangles.size() << '\n';
  for (std::size_t i = 0; i < m.triangles.size(); ++i) os << "5\n";
  os << "CELL_DATA " << m.triangles.size() << '\n';
  os << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const auto& t : m.triangles) os << t.tag << '\n';
  for (const auto& a : arrays) {
    if (a.values.size() != m.triangles.size())
      throw FileError("cell array " + a.name + " has the wrong length");
    os << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : a.values) os << v << '\n';
  }
  return os.str();
}

std::vector<CellArray> standard_field_arrays(const solver::ElementFields& f) {
  const std::size_t n = f.jz.size();
  std::vector<CellArray> out{{"Jz_re", {}}, {"Jz_im", {}}, {"Jz_abs", {}}, {"Bx_re", {}},
                             {"Bx_im", {}}, {"By_re", {}}, {"By_im", {}}, {"B_abs", {}}};
  for (auto& a : out) a.values.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[0].values[t] = f.jz[t].real();
    out[1].values[t] = f.jz[t].imag();
    out[2].values[t] = std::abs(f.jz[t]);
    out[3].values[t] = f.bx[t].real();
    out[4].values[t] = f.bx[t].imag();
    out[5].values[t] = f.by[t].real();
    out[6].values[t] = f.by[t].imag();
    out[7].values[t] = std::sqrt(std::norm(f.bx[t]) + std::norm(f.by[t]));
  }
  return out;
}

json fields_to_json(const mesh::TriMesh& m, const std::vector<CellArray>& arrays) {
  json nodes = json::array();
  for (const auto& p : m.nodes) nodes.push_back({p.x, p.y});
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back({t.v[0], t.v[1], t.v[2]});
  json out = {{"nodes", nodes}, {"triangles", tris}};
  json range = json::object();
  for (const auto& a : arrays) {
    out[a.name] = a.values;
    if (a.values.empty()) {
      range[a.name] = {0.0, 0.0};
    } else {
      const auto [lo, hi] = std::minmax_element(a.values.begin(), a.values.end());
      range[a.name] = {*lo, *hi};
    }
  }
  out["range"] = range;
  return out;
}

}  // namespace emsim::io
