// Copyright 2026 The plastiq Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef PLASTIQ_BIN
#error "PLASTIQ_BIN must point at the plastiq executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("plastiq_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  Run run(const std::string& args) const {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string(PLASTIQ_BIN) + " " + args + " >" + o.string() + " 2>" + e.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

const char* kSquare = R"({
  "domain": {"kind": "rectangle", "width": 1.0, "height": 1.0, "edge_length": 0.2},
  "boundary": {
    "segments": [
      {"segment": 0, "kind": "dirichlet", "w": [[0.0, 0.0], [1.0, 3.0]]},
      {"segment": 1, "kind": "dirichlet", "w": 3.0},
      {"segment": 2, "kind": "dirichlet", "w": [[0.0, 3.0], [1.0, 0.0]]},
      {"segment": 3, "kind": "dirichlet", "w": 0.0}
    ]
  },
  "analyses": ["classify"]
})";

}  // namespace

TEST_CASE("schema lists defaults") {
  Sandbox s;
  const Run r = s.run("schema");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["classify"]["eps_sat"]["default"] == 0.02);
  CHECK(j["solver"]["theta"]["default"] == 1.0);
  CHECK(j["solver"]["max_iter"]["type"] == "integer");
  CHECK(j["output"]["dir"].contains("doc"));
}

TEST_CASE("config errors exit with 1") {
  Sandbox s;
  SUBCASE("malformed json") {
    const Run r = s.run("run " + s.write("bad.json", "{\n  \"domain\": {,\n}").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("line 2") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const Run r = s.run("run " + s.write("k.json", R"({"solver": {"thetta": 1}})").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("solver.thetta") != std::string::npos);
  }
  SUBCASE("missing Dirichlet data") {
    const Run r = s.run("run " + s.write("w.json", R"({
      "domain": {"kind": "rectangle", "edge_length": 0.25},
      "boundary": {"segments": [{"segment": 0, "kind": "dirichlet", "w": 0},
                                {"segment": 1, "kind": "dirichlet"}]}})")
                                    .string());
    CHECK(r.code == 1);
    CHECK(r.err.find("missing w on Dirichlet segment 1") != std::string::npos);
  }
  SUBCASE("bad solver value") {
    const Run r = s.run("run " + s.write("t.json", R"({"solver": {"theta": 3}})").string());
    CHECK(r.code == 1);
  }
  SUBCASE("missing file") {
    CHECK(s.run("run " + (s.dir / "none.json").string()).code == 1);
  }
}

TEST_CASE("oracle fields skip the solver") {
  Sandbox s;
  const fs::path cfg = s.write("fan.json", R"({
    "domain": {"edge_length": 0.1},
    "oracle": {"name": "monotone_fan"},
    "boundary": {"source": "oracle"},
    "fields": "oracle",
    "analyses": ["classify"],
    "assertions": {"char_components_max": 2}})");
  const fs::path out = s.dir / "out";
  const Run r = s.run("--out " + out.string() + " run " + cfg.string());
  REQUIRE(r.code == 0);
  for (const char* f : {"vertices.csv", "cells.csv", "boundary.csv", "fields.vtk", "interface.csv",
                        "char_boundary.csv", "report.json"})
    CHECK(fs::exists(out / f));
  const auto rep = nlohmann::json::parse(Sandbox::slurp(out / "report.json"));
  CHECK(rep["solve"].is_null());
  CHECK(rep["passed"] == true);
}

TEST_CASE("runs are deterministic") {
  Sandbox s;
  const fs::path cfg = s.write("sq.json", kSquare);
  REQUIRE(s.run("--out " + (s.dir / "a").string() + " run " + cfg.string()).code == 0);
  REQUIRE(s.run("--out " + (s.dir / "b").string() + " run " + cfg.string()).code == 0);
  for (const char* f : {"report.json", "cells.csv", "vertices.csv"})
    CHECK(Sandbox::slurp(s.dir / "a" / f) == Sandbox::slurp(s.dir / "b" / f));
}

TEST_CASE("iteration cap exits with 2") {
  Sandbox s;
  auto j = nlohmann::json::parse(kSquare);
  j["solver"]["max_iter"] = 3;
  const Run r = s.run("--out " + (s.dir / "o").string() + " run " + s.write("c.json", j.dump()).string());
  CHECK(r.code == 2);
  const auto rep = nlohmann::json::parse(Sandbox::slurp(s.dir / "o" / "report.json"));
  CHECK(rep["converged"] == false);
}

TEST_CASE("failed assertion exits with 3") {
  Sandbox s;
  auto j = nlohmann::json::parse(kSquare);
  j["assertions"]["kkt_max"] = 1e-30;
  CHECK(s.run("--out " + (s.dir / "o").string() + " run " + s.write("c.json", j.dump()).string()).code == 3);
}

TEST_CASE("verify-analytic") {
  Sandbox s;
  const Run r = s.run("verify-analytic monotone_fan 0.1");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(s.run("verify-analytic nosuch 0.1").code == 1);
}
