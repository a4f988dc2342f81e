#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "emsim/geometry.hpp"
#include "emsim/mesher.hpp"
#include "emsim/solver.hpp"

namespace emsim::io {

using json = nlohmann::json;

class FileError : public Error {
 public:
  explicit FileError(const std::string& what) : Error("FileError", what) {}
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it into place, so readers see
/// either the old file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// {"radius_m": r, "boundary_margin_m": d, "centers": [[x, y], ...]}
json layout_to_json(const geometry::ConductorLayout& layout);
/// Throws GeometryError on missing fields or wrong types.
geometry::ConductorLayout layout_from_json(const json& j);

json mesh_to_json(const mesh::TriMesh& mesh);
mesh::TriMesh mesh_from_json(const json& j);

json solution_to_json(const solver::SolveResult& result, const solver::FEProblem& problem,
                      const std::vector<solver::ConductorReport>& report);

struct CellArray {
  std::string name;
  std::vector<double> values;  // one per triangle
};

/// Legacy ASCII VTK unstructured grid, region tags plus the given cell arrays.
std::string mesh_to_vtk(const mesh::TriMesh& mesh, const std::vector<CellArray>& arrays,
                        std::string_view title = "emsim");

/// Jz_re, Jz_im, Jz_abs, Bx/By re/im, B_abs per triangle.
std::vector<CellArray> standard_field_arrays(const solver::ElementFields& fields);

/// {"nodes", "triangles", "<name>": [...], "range": {"<name>": [min, max]}}
json fields_to_json(const mesh::TriMesh& mesh, const std::vector<CellArray>& arrays);

}  // namespace emsim::io
