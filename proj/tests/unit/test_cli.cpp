#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "emsim/io.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace emsim;
namespace cli = emsim::cli;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("emsim_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = emsim::cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string write(const fs::path& p, const std::string& content) {
  io::write_file_atomic(p, content);
  return p.string();
}

const char* kOne = "Run an initial mqs simulation using only one conductor";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2") {
  auto r = invoke({"run"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kUsage);
  CHECK(invoke({"run", "--prompt", "x", "--mode", "sideways", "--provider", "stub"}).code == cli::kUsage);
  CHECK(invoke({"check", "/nonexistent/file.pro", "--conductors", "3"}).code == cli::kUsage);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("run with the stub writes a report and exits 0") {
  TempDir tmp;
  auto r = invoke({"--out", tmp.path.string(), "--json", "run", "--prompt", kOne, "--provider", "stub", "--mode",
                "layout_only"});
  CHECK(r.code == cli::kOk);
  const auto j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["exit_code"] == 0);
  CHECK(j["report"]["schema_version"] == 1);
  CHECK(j["report"]["mode"] == "layout_only");
  CHECK(j["report"]["verdict"]["layers"].size() == 10);
  CHECK(j["report"]["facts"]["conductor_count"] == 1);
  const fs::path report = j["report_path"].get<std::string>();
  CHECK(fs::exists(report));
  CHECK(json::parse(io::read_file(report)) == j["report"]);
}

TEST_CASE("http provider without a key exits 3") {
  TempDir tmp;
  const char* saved = std::getenv("EMSIM_LLM_API_KEY");
  const std::string keep = saved ? saved : "";
  ::unsetenv("EMSIM_LLM_API_KEY");
  auto r = invoke({"--out", tmp.path.string(), "run", "--prompt", kOne, "--provider", "http"});
  CHECK(r.code == cli::kProvider);
  CHECK(r.err.find("AuthMissing") != std::string::npos);
  // auto picks the stub when the key is unset
  CHECK(invoke({"--out", tmp.path.string(), "run", "--prompt", kOne, "--mode", "layout_only"}).code == cli::kOk);
  if (saved) ::setenv("EMSIM_LLM_API_KEY", keep.c_str(), 1);
}

TEST_CASE("validation failures exit 4") {
  TempDir tmp;
  const auto cfg = write(tmp.path / "cfg.json", R"({"mesh_scale": 2.0})");
  auto r = invoke({"--out", tmp.path.string(), "--config", cfg, "run", "--prompt",
                "Evaluate the plot of the magnetic vector field of three conductors along the x-axis", "--provider",
                "stub", "--no-dsl-examples", "--mode", "with_post"});
  CHECK(r.code == cli::kValidation);
  CHECK(r.out.find("dsl_syntax          failed") != std::string::npos);
}

TEST_CASE("config files are checked") {
  TempDir tmp;
  const auto bad = write(tmp.path / "bad.json", R"({"mesh_scal": 2.0})");
  auto r = invoke({"--config", bad, "run", "--prompt", kOne, "--provider", "stub"});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("mesh_scal") != std::string::npos);
  const auto broken = write(tmp.path / "broken.json", "{");
  CHECK(invoke({"--config", broken, "run", "--prompt", kOne}).code == cli::kUsage);
}

TEST_CASE("solve a single conductor against closed forms") {
  TempDir tmp;
  const auto layout = write(tmp.path / "one.json", R"({"centers": [[0, 0]]})");
  const double sigma = 58.1e6, rc = 5e-3;

  auto ac = invoke({"--out", (tmp.path / "ac").string(), "--json", "solve", layout});
  REQUIRE(ac.code == cli::kOk);
  const auto j = json::parse(ac.out);
  CHECK(j["schema_version"] == 1);
  REQUIRE(j["conductors"].size() == 1);
  const double loss = j["conductors"][0]["loss_W_per_m"];
  CHECK(loss == doctest::Approx(1.098e-4).epsilon(0.01));
  CHECK(fs::exists(tmp.path / "ac" / "Results" / "fields.vtk"));
  CHECK(fs::exists(tmp.path / "ac" / "solution.json"));

  auto dc = invoke({"--out", (tmp.path / "dc").string(), "--json", "solve", layout, "--freq", "0"});
  REQUIRE(dc.code == cli::kOk);
  const double dc_loss = json::parse(dc.out)["conductors"][0]["loss_W_per_m"];
  const double closed = 1.0 / (2.0 * sigma * std::numbers::pi * rc * rc);
  CHECK(dc_loss == doctest::Approx(closed).epsilon(0.005));
  CHECK(dc_loss < loss);

  auto table = invoke({"--out", (tmp.path / "t").string(), "solve", layout, "--mesh-scale", "2"});
  CHECK(table.code == cli::kOk);
  CHECK(table.out.find("total loss") != std::string::npos);
}

TEST_CASE("solve reports overlapping pairs") {
  TempDir tmp;
  const auto layout = write(tmp.path / "overlap.json", R"({"centers": [[0, 0], [0.006, 0], [0.05, 0]]})");
  auto r = invoke({"--out", tmp.path.string(), "solve", layout});
  CHECK(r.code == cli::kValidation);
  CHECK(r.err.find("(0,1)") != std::string::npos);
  CHECK(r.err.find("(1,2)") == std::string::npos);
  const auto empty = write(tmp.path / "empty.json", R"({"centers": []})");
  CHECK(invoke({"solve", empty}).code == cli::kValidation);
  const auto junk = write(tmp.path / "junk.json", "not json");
  CHECK(invoke({"solve", junk}).code == cli::kUsage);
}

TEST_CASE("check runs the layered DSL checks") {
  TempDir tmp;
  const fs::path data = EMSIM_TEST_DATA;
  const auto loss = (data / "loss_density_conductor_4.pro").string();
  auto ok = invoke({"check", loss, "--conductors", "7"});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find(": ok") != std::string::npos);

  auto energy = io::read_file(data / "energy_density_diagonal.pro");
  CHECK(invoke({"check", write(tmp.path / "e.pro", energy), "--conductors", "9"}).code == cli::kOk);
  const auto at = energy.find("0.25");
  REQUIRE(at != std::string::npos);
  energy.replace(at, 4, "0.5");
  auto half = invoke({"--json", "check", write(tmp.path / "half.pro", energy), "--conductors", "9"});
  CHECK(half.code == cli::kValidation);
  const auto j = json::parse(half.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["passed"] == false);
  REQUIRE(!j["diagnostics"].empty());
  CHECK(j["diagnostics"][0]["layer"] == "physics_semantics");

  auto unknown = invoke({"check", loss, "--conductors", "3"});
  CHECK(unknown.code == cli::kValidation);
  CHECK(unknown.out.find("dsl_semantics") != std::string::npos);

  const auto layout = write(tmp.path / "seven.json", R"({"centers": [[0,0],[1,0],[2,0],[3,0],[4,0],[5,0],[6,0]]})");
  CHECK(invoke({"check", loss, "--layout", layout}).code == cli::kOk);
  CHECK(invoke({"check", loss}).code == cli::kUsage);

  std::string broken = io::read_file(data / "loss_density_conductor_4.pro");
  broken.erase(broken.rfind('}'), 1);
  auto syn = invoke({"check", write(tmp.path / "b.pro", broken), "--conductors", "7"});
  CHECK(syn.code == cli::kValidation);
  CHECK(syn.out.find("dsl_syntax") != std::string::npos);
}

TEST_CASE("repl loops over stdin") {
  TempDir tmp;
  auto r = invoke({"--out", tmp.path.string(), "repl", "--provider", "stub", "--mode", "layout_only", "--mesh-scale", "2"},
               std::string(kOne) + "\n" + kOne + "\n:q\n");
  CHECK(r.code == cli::kOk);
  std::size_t n = 0;
  for (auto p = r.out.find("layout_syntax"); p != std::string::npos; p = r.out.find("layout_syntax", p + 1)) ++n;
  CHECK(n == 2);
}

}  // TEST_SUITE
