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

// plastiq command line: run a configured pipeline, print the config schema,
// or check an oracle against the discrete diagnostics.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "plastiq/analytic.hpp"
#include "plastiq/classify.hpp"
#include "plastiq/io.hpp"
#include "plastiq/pipeline.hpp"
#include "plastiq/verify.hpp"

namespace {

using namespace plastiq;

int cmd_run(const std::string& path, const std::string& out, int workers, long long seed) {
  RunConfig cfg;
  try {
    cfg = load_config(path);
    if (!out.empty()) cfg.out = out;
    if (workers > 0) cfg.solver.workers = workers;
    if (seed >= 0) cfg.solver.seed = static_cast<std::uint64_t>(seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  RunResult r;
  try {
    r = run_pipeline(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto& rep = r.report;
  std::printf("mesh: %d vertices, %d triangles, h = %.4g\n", rep["mesh"]["vertices"].get<int>(),
              rep["mesh"]["triangles"].get<int>(), rep["mesh"]["mesh_size"].get<double>());
  if (!rep["solve"].is_null())
    std::printf("solve: %d iterations, converged %s, %.2f s\n", rep["solve"]["iterations"].get<int>(),
                rep["solve"]["converged"].get<bool>() ? "yes" : "no", r.wall_seconds);
  for (const auto& a : rep["assertions"])
    std::printf("%s %s = %.6g (limit %.6g)\n", a["passed"].get<bool>() ? "PASS" : "FAIL",
                a["name"].get<std::string>().c_str(), a["value"].is_null() ? NAN : a["value"].get<double>(),
                a["limit"].get<double>());
  std::printf("report: %s/report.json\n", cfg.out.c_str());
  if (r.exit_code == 2) std::fprintf(stderr, "solver did not converge\n");
  return r.exit_code;
}

int cmd_verify(const std::string& name, double h) {
  AnalyticSolution o;
  try {
    o = make_oracle(name);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  if (!(h > 0.0) || h > 0.5) {
    std::cerr << "h must lie in (0, 0.5]\n";
    return 1;
  }
  bool ok = true;
  auto line = [&ok](bool pass, const std::string& what) {
    ok = ok && pass;
    std::printf("%s %s\n", pass ? "PASS" : "FAIL", what.c_str());
  };
  char buf[256];

  const RateStudy rs = kkt_rate_study(o, {h, h / 2});
  for (int k = 0; k < 5; ++k) {
    const double a = residual_by_index(rs.records[0], k), b = residual_by_index(rs.records[1], k);
    if (!rs.applicable[k]) {
      std::printf("n/a  %s (no displacement)\n", kResidualNames[k]);
      continue;
    }
    std::snprintf(buf, sizeof buf, "%s %.3e -> %.3e (ratio %.2f)", kResidualNames[k], a, b, rs.ratios[k][0]);
    line(rs.passes[k], buf);
  }

  const TriMesh mesh = o.mesh(h);
  const std::vector<Vec2> sigma = o.sample_sigma(mesh);
  const RegionMap map = analyze_regions(sigma, mesh, 0.005);
  std::snprintf(buf, sizeof buf, "characteristic boundary: %d component(s)", map.char_boundary.components);
  line(map.char_boundary.theorem_consistent, buf);
  if (map.plastic_count() > 0) {
    const FanReport fr = detect_fans(map, sigma, mesh);
    std::printf("info fans: %zu", fr.fans.size());
    for (const Fan& f : fr.fans) std::printf(" (%.4f, %.4f)", f.apex.x, f.apex.y);
    std::printf("\n");
  }

  const StructureReport sr = structure_suite(o, h);
  std::snprintf(buf, sizeof buf, "no loops among %d plastic-touching characteristics", sr.audit.plastic_touching);
  line(sr.audit.passes(), buf);
  if (sr.arcs > 0) {
    std::snprintf(buf, sizeof buf, "constancy on %d plastic arcs: straight %.3g sigma %.3g u %.3g (tol %.3g)", sr.arcs,
                  sr.max_straightness, sr.max_sigma_constancy, sr.max_u_constancy, sr.tol);
    line(sr.constancy_passes(), buf);
  }
  if (!sr.level_records.empty()) {
    std::snprintf(buf, sizeof buf, "level-set alignment over %zu levels: max angle %.3g (tol %.3g)",
                  sr.level_records.size(), sr.max_level_angle, sr.tol);
    line(sr.levels_pass(), buf);
  }
  const int crossings = sr.crossings[0] + sr.crossings[1];
  if (crossings + sr.non_transversal() > 0)
    std::printf("info crossings: %d transversal, %d tangential, %d endpoint touches\n", crossings, sr.crossings[2],
                sr.crossings[3]);
  std::printf("%s\n", ok ? "verify-analytic: PASS" : "verify-analytic: FAIL");
  return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plastiq: scalar Hencky plasticity solver and analyzer"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out;
  int workers = 0;
  long long seed = -1;
  app.add_option("--out", out, "output directory (overrides the config)");
  app.add_option("--workers", workers, "worker threads (default 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "solver seed")->check(CLI::NonNegativeNumber);

  std::string config;
  auto* run = app.add_subcommand("run", "run the pipeline described by a JSON config");
  run->add_option("config", config, "config file")->required();

  auto* schema = app.add_subcommand("schema", "print the config schema with defaults");

  std::string oracle;
  double h = 0.05;
  auto* verify = app.add_subcommand("verify-analytic", "sample an oracle and run the residual and audit checks");
  verify->add_option("oracle", oracle, "oracle name")->required();
  verify->add_option("mesh_size", h, "mesh size h")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    if (*run) return cmd_run(config, out, workers, seed);
    if (*schema) {
      std::cout << config_schema().dump(2) << '\n';
      return 0;
    }
    if (*verify) return cmd_verify(oracle, h);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
