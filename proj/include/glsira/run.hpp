#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "glsira/graph.hpp"
#include "glsira/sira.hpp"

// Pipelines behind the command line tool: file in, RunRecord out.
namespace glsira {

enum class Command { solve, verify, bench, components, ablation };

struct RunConfig {
  std::string input;  // "-" reads stdin
  Command command = Command::solve;
  std::int64_t d = 1;
  double eps = 1e-8;
  std::int64_t m = 0;  // 0: automatic
  std::int64_t q = 0;  // 0: automatic
  double inner_tol = 1e-2;
  int inner_maxit = 500;
  std::string solver = "cg";        // cg | minres
  std::string precond = "deflated"; // none | jacobi | deflated
  std::string trim = "auto";        // auto | max-degree | min-degree | vertex index in the solved component
  std::optional<double> delta;      // unset: automatic
  double sigma0 = 0.0;
  std::uint64_t seed = 20170301;
  std::string output;
  std::string history;
  std::string vectors;
  std::string dump_laplacian;
  bool validate = false;

  /// Throws std::invalid_argument on bad values; never touches the file system.
  SiraConfig<double> sira() const;
  TrimPolicy trim_policy() const;

  bool operator==(const RunConfig&) const = default;
};

struct VerifySummary {
  double max_residual = 0.0;
  double orthogonality_defect = 0.0;
  double kernel_defect = 0.0;
  bool oracle_checked = false;
  std::optional<double> max_eigenvalue_error;
  bool skipped_eigenvalue = false;
  bool passed = false;

  bool operator==(const VerifySummary&) const = default;
};

struct RunRecord {
  std::string method = "isira";  // isira | perturbed | nullspace_deflated
  RunConfig config;
  std::int64_t n_input = 0;       // vertices in the file
  std::int64_t n = 0;             // vertices in the solved component
  std::int64_t nnz = 0;           // Laplacian nonzeros
  std::int64_t components = 0;
  std::vector<VertexId> vertex_map;  // component vertex -> input vertex; empty when the input is connected
  std::string status;             // converged | max_iterations | stagnation | skipped
  std::string message;
  std::int64_t trim_index = -1;
  double delta = 0.0;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  std::int64_t outer_iterations = 0;
  std::int64_t inner_iterations = 0;
  std::int64_t inner_failures = 0;
  std::vector<IterationRecord> history;
  std::optional<double> max_deviation;  // baselines: max |lambda - lambda_isira|
  std::optional<VerifySummary> verification;
  std::map<std::string, double> timings;  // seconds per phase

  bool operator==(const RunRecord&) const = default;
};

struct SolveRun {
  RunRecord record;
  Eigen::MatrixXd vectors;  // n x c eigenvectors on the solved component
};

struct ComponentReport {
  std::int64_t n_input = 0;
  std::int64_t edges = 0;
  std::vector<std::int64_t> sizes;
  std::int64_t largest = 0;  // component id

  bool operator==(const ComponentReport&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);
void to_json(nlohmann::json& j, const VerifySummary& v);
void from_json(const nlohmann::json& j, VerifySummary& v);
void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);
void to_json(nlohmann::json& j, const ComponentReport& r);
void from_json(const nlohmann::json& j, ComponentReport& r);

std::string command_name(Command c);
Command parse_command(const std::string& name);

/// Reads and normalizes an edge list; IO failures throw std::runtime_error.
EdgeList load_edge_list(const std::string& path);

/// parse, build, largest component, Laplacian, isira_solve, residual check.
SolveRun run_solve(const RunConfig& cfg);
/// run_solve plus a dense oracle comparison when the component is small.
SolveRun run_verify(const RunConfig& cfg);
/// isira and the two dense baselines on the same component. Baselines are
/// skipped, not failed, above the dense size limit.
std::vector<RunRecord> run_bench(const RunConfig& cfg, double tau = 1e-8);
/// isira under the min-degree, vertex 0 and max-degree trim policies.
std::vector<RunRecord> run_trim_ablation(const RunConfig& cfg);
ComponentReport run_components(const RunConfig& cfg);

/// 0 converged, 2 partial. Usage and IO errors (1) never produce a record.
int exit_code(const RunRecord& r);
int exit_code(const std::vector<RunRecord>& rs);

/// Record without the wall-time object; used for determinism checks.
nlohmann::json stable_json(const RunRecord& r);

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);
/// 16-byte little-endian header (u32 magic "GLEV", u64 n, u32 d) followed by
/// n*d f64 values in column-major order.
void write_vectors(std::ostream& os, const Eigen::MatrixXd& V);
Eigen::MatrixXd read_vectors(std::istream& is);
/// "u v" lines, 0-based.
void write_edge_list(std::ostream& os, const EdgeList& el);
/// Plain-text comparison table: code, n, nnz, time, status, deviation.
void write_table(std::ostream& os, const std::vector<RunRecord>& rs);

}  // namespace glsira
