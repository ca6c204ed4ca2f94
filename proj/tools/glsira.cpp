// glsira: smallest positive Laplacian eigenpairs of an edge-list graph.
//
//   glsira solve graph.txt --num-eigs 10 --output out.json --history hist.csv
//   glsira verify graph.txt --num-eigs 5
//   glsira bench graph.txt --num-eigs 5
//   glsira ablation graph.txt --num-eigs 10
//   glsira components graph.txt
//   glsira generate grid --rows 10 --cols 10 > grid.txt
//
// Exit status: 0 converged, 1 usage or IO error, 2 partial convergence.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "glsira/generators.hpp"
#include "glsira/run.hpp"

namespace {

using glsira::RunConfig;

void add_solver_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("input", cfg.input, "edge-list file, '-' for stdin")->required();
  sub->add_option("--num-eigs", cfg.d, "number of eigenpairs")->capture_default_str();
  sub->add_option("--tol", cfg.eps, "outer residual tolerance")->capture_default_str();
  sub->add_option("--max-subspace", cfg.m, "maximum subspace dimension (0 = max(30, q + 10))")->capture_default_str();
  sub->add_option("--restart-size", cfg.q, "restart dimension (0 = max(d + 5, 15))")->capture_default_str();
  sub->add_option("--inner-tol", cfg.inner_tol, "relative inner solve tolerance")->capture_default_str();
  sub->add_option("--inner-maxit", cfg.inner_maxit, "inner iteration limit")->capture_default_str();
  sub->add_option("--solver", cfg.solver, "inner solver")
      ->check(CLI::IsMember({"cg", "minres"}))
      ->capture_default_str();
  sub->add_option("--precond", cfg.precond, "inner preconditioner")
      ->check(CLI::IsMember({"none", "jacobi", "deflated"}))
      ->capture_default_str();
  sub->add_option("--trim", cfg.trim, "auto | max-degree | min-degree | vertex index")->capture_default_str();
  sub->add_option_function<std::string>(
      "--delta",
      [&cfg](const std::string& s) {
        if (s == "auto")
          cfg.delta.reset();
        else
          cfg.delta = std::stod(s);
      },
      "deflation weight, 'auto' = 2 max degree");
  sub->add_option("--sigma0", cfg.sigma0, "initial shift")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  sub->add_option("--output", cfg.output, "JSON output path (default stdout)");
  sub->add_option("--history", cfg.history, "CSV convergence history path");
  sub->add_option("--vectors", cfg.vectors, "binary eigenvector output path");
  sub->add_option("--dump-laplacian", cfg.dump_laplacian, "Matrix Market dump of the solved Laplacian");
  sub->add_flag("--validate", cfg.validate, "check kernel orthogonality every iteration");
}

template <typename Write>
void with_output(const std::string& path, Write&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write(os);
  if (!os) throw std::runtime_error("error writing " + path);
}

int emit_solve(const RunConfig& cfg, const glsira::SolveRun& run) {
  with_output(cfg.output, [&](std::ostream& os) { os << nlohmann::json(run.record).dump(2) << '\n'; });
  if (!cfg.history.empty())
    with_output(cfg.history, [&](std::ostream& os) { glsira::write_history_csv(os, run.record.history); });
  if (!cfg.vectors.empty())
    with_output(cfg.vectors, [&](std::ostream& os) { glsira::write_vectors(os, run.vectors); });
  if (run.record.status != "converged") std::cerr << "glsira: " << run.record.message << '\n';
  return glsira::exit_code(run.record);
}

int emit_set(const RunConfig& cfg, const std::vector<glsira::RunRecord>& rs) {
  glsira::write_table(std::cout, rs);
  if (!cfg.output.empty())
    with_output(cfg.output, [&](std::ostream& os) { os << nlohmann::json{{"runs", rs}}.dump(2) << '\n'; });
  return glsira::exit_code(rs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smallest positive eigenpairs of graph Laplacians"};
  app.require_subcommand(1);

  RunConfig cfg;
  auto* solve = app.add_subcommand("solve", "solve on the largest connected component");
  auto* verify = app.add_subcommand("verify", "solve, then check against a dense eigensolver when n <= 2000");
  auto* bench = app.add_subcommand("bench", "compare with the dense baselines");
  auto* ablation = app.add_subcommand("ablation", "solve under min-degree, vertex 0 and max-degree trimming");
  for (auto* sub : {solve, verify, bench, ablation}) add_solver_flags(sub, cfg);
  double tau = 1e-8;
  bench->add_option("--tau", tau, "shift for the perturbed baseline")->capture_default_str();

  auto* components = app.add_subcommand("components", "connected component sizes");
  components->add_option("input", cfg.input, "edge-list file, '-' for stdin")->required();
  components->add_option("--output", cfg.output, "JSON output path (default stdout)");

  std::string family;
  std::uint64_t gen_n = 10, gen_cols = 0, gen_seed = 20170301;
  double avg_degree = 10.0;
  auto* generate = app.add_subcommand("generate", "write a fixture graph as an edge list");
  generate->add_option("family", family, "path | cycle | star | complete | grid | er")
      ->required()
      ->check(CLI::IsMember({"path", "cycle", "star", "complete", "grid", "er"}));
  generate->add_option("--n,--rows", gen_n, "vertex count, or grid rows")->capture_default_str();
  generate->add_option("--cols", gen_cols, "grid columns (default: rows)");
  generate->add_option("--avg-degree", avg_degree, "ER average degree")->capture_default_str();
  generate->add_option("--seed", gen_seed, "ER seed")->capture_default_str();
  generate->add_option("--output", cfg.output, "edge-list path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*generate) {
      namespace gen = glsira::generators;
      glsira::EdgeList el;
      if (family == "path") el = gen::path(gen_n);
      else if (family == "cycle") el = gen::cycle(gen_n);
      else if (family == "star") el = gen::star(gen_n);
      else if (family == "complete") el = gen::complete(gen_n);
      else if (family == "grid") el = gen::grid(gen_n, gen_cols ? gen_cols : gen_n);
      else el = gen::erdos_renyi(gen_n, avg_degree, gen_seed);
      with_output(cfg.output, [&](std::ostream& os) { glsira::write_edge_list(os, el); });
      return 0;
    }
    if (*components) {
      cfg.command = glsira::Command::components;
      const auto rep = glsira::run_components(cfg);
      with_output(cfg.output, [&](std::ostream& os) { os << nlohmann::json(rep).dump(2) << '\n'; });
      return 0;
    }
    if (*solve) {
      cfg.command = glsira::Command::solve;
      return emit_solve(cfg, glsira::run_solve(cfg));
    }
    if (*verify) {
      cfg.command = glsira::Command::verify;
      const auto run = glsira::run_verify(cfg);
      const int rc = emit_solve(cfg, run);
      if (rc == 0 && !run.record.verification->passed) {
        std::cerr << "glsira: verification failed\n";
        return 2;
      }
      return rc;
    }
    if (*bench) {
      cfg.command = glsira::Command::bench;
      return emit_set(cfg, glsira::run_bench(cfg, tau));
    }
    cfg.command = glsira::Command::ablation;
    return emit_set(cfg, glsira::run_trim_ablation(cfg));
  } catch (const std::exception& e) {
    std::cerr << "glsira: " << e.what() << '\n';
    return 1;
  }
}
