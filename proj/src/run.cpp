#include "glsira/run.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "glsira/dense_oracle.hpp"
#include "glsira/laplacian.hpp"

namespace glsira {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key) || j.at(key).is_null())
    v.reset();
  else
    v = j.at(key).get<T>();
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::stagnation: return "stagnation";
  }
  return "unknown";
}

// Everything up to and including the Laplacian of the largest component.
struct Prepared {
  std::int64_t n_input = 0;
  std::int64_t components = 0;
  InducedSubgraph sub;
  LaplacianMatrix<double> L;
  std::map<std::string, double> timings;
};

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  auto t = Clock::now();
  const EdgeList el = load_edge_list(cfg.input);
  p.timings["parse"] = seconds_since(t);

  t = Clock::now();
  const Graph g = build_graph(el);
  p.n_input = g.n;
  p.timings["build"] = seconds_since(t);

  t = Clock::now();
  p.components = connected_components(g).count();
  p.sub = largest_component(g);
  if (p.components == 1) p.sub.vertex_map.clear();
  p.timings["components"] = seconds_since(t);

  t = Clock::now();
  p.L = laplacian<double>(p.sub.graph);
  p.timings["laplacian"] = seconds_since(t);

  if (!cfg.dump_laplacian.empty()) {
    std::ofstream os(cfg.dump_laplacian);
    if (!os) throw std::runtime_error("cannot write " + cfg.dump_laplacian);
    write_matrix_market(os, p.L);
  }
  return p;
}

RunRecord base_record(const RunConfig& cfg, const Prepared& p) {
  RunRecord r;
  r.config = cfg;
  r.n_input = p.n_input;
  r.n = p.L.size();
  r.nnz = p.L.nonzeros();
  r.components = p.components;
  r.vertex_map = p.sub.vertex_map;
  r.timings = p.timings;
  return r;
}

SolveRun solve_prepared(const RunConfig& cfg, const Prepared& p, bool use_oracle) {
  const auto sira = cfg.sira();
  SolveRun out{base_record(cfg, p), {}};
  RunRecord& r = out.record;

  auto t = Clock::now();
  const auto res = isira_solve(p.L, sira);
  r.timings["solve"] = seconds_since(t);

  r.status = status_name(res.status);
  r.message = res.message;
  r.trim_index = res.trim_index;
  r.delta = res.delta;
  r.eigenvalues = res.lambdas;
  r.residuals = res.residuals;
  r.outer_iterations = res.outer_iterations;
  r.inner_iterations = res.inner_iterations;
  r.inner_failures = res.inner_failures;
  r.history = res.history;
  out.vectors = res.vectors;

  t = Clock::now();
  const auto rep = oracle::verify_eigresult(p.L, res, sira.eps, use_oracle);
  r.timings["verify"] = seconds_since(t);
  VerifySummary v;
  v.max_residual = rep.max_residual;
  v.orthogonality_defect = rep.orthogonality_defect;
  v.kernel_defect = rep.kernel_defect;
  v.oracle_checked = rep.oracle_checked;
  v.max_eigenvalue_error = rep.max_eigenvalue_error;
  v.skipped_eigenvalue = rep.skipped_eigenvalue;
  v.passed = rep.residuals_ok && rep.ascending && !rep.skipped_eigenvalue &&
             (!rep.max_eigenvalue_error || *rep.max_eigenvalue_error <= 1e-6);
  r.verification = v;
  return out;
}

double total_time(const std::map<std::string, double>& t) {
  double s = 0.0;
  for (const auto& [k, v] : t)
    if (k != "total") s += v;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

SiraConfig<double> RunConfig::sira() const {
  SiraConfig<double> s;
  s.d = d;
  s.m = m;
  s.q = q;
  s.eps = eps;
  s.inner.tol = inner_tol;
  s.inner.maxit = inner_maxit;
  if (solver == "cg")
    s.inner.solver = InnerSolverKind::cg;
  else if (solver == "minres")
    s.inner.solver = InnerSolverKind::minres;
  else
    throw std::invalid_argument("unknown solver '" + solver + "' (cg, minres)");
  if (precond == "none")
    s.inner.precond = PreconditionerKind::identity;
  else if (precond == "jacobi")
    s.inner.precond = PreconditionerKind::jacobi;
  else if (precond == "deflated")
    s.inner.precond = PreconditionerKind::deflated;
  else
    throw std::invalid_argument("unknown preconditioner '" + precond + "' (none, jacobi, deflated)");
  s.trim_policy = trim_policy();
  s.delta = delta;
  s.sigma0 = sigma0;
  s.seed = seed;
  s.validate = validate;
  if (m < 0 || q < 0) throw std::invalid_argument("subspace sizes must be nonnegative");
  s.check();
  return s;
}

TrimPolicy RunConfig::trim_policy() const {
  if (trim == "auto" || trim == "max-degree") return TrimPolicy::max_degree();
  if (trim == "min-degree") return TrimPolicy::min_degree();
  std::size_t used = 0;
  long long i = -1;
  try {
    i = std::stoll(trim, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != trim.size() || i < 0)
    throw std::invalid_argument("trim must be auto, max-degree, min-degree or a vertex index, got '" + trim + "'");
  return TrimPolicy::fixed(static_cast<Index>(i));
}

std::string command_name(Command c) {
  switch (c) {
    case Command::solve: return "solve";
    case Command::verify: return "verify";
    case Command::bench: return "bench";
    case Command::components: return "components";
    case Command::ablation: return "ablation";
  }
  return "solve";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::solve, Command::verify, Command::bench, Command::components, Command::ablation})
    if (command_name(c) == name) return c;
  throw std::invalid_argument("unknown command '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const RunConfig& c) {
  j = json{{"input", c.input},
           {"command", command_name(c.command)},
           {"d", c.d},
           {"eps", c.eps},
           {"m", c.m},
           {"q", c.q},
           {"inner_tol", c.inner_tol},
           {"inner_maxit", c.inner_maxit},
           {"solver", c.solver},
           {"precond", c.precond},
           {"trim", c.trim},
           {"sigma0", c.sigma0},
           {"seed", c.seed},
           {"output", c.output},
           {"history", c.history},
           {"vectors", c.vectors},
           {"dump_laplacian", c.dump_laplacian},
           {"validate", c.validate}};
  put_optional(j, "delta", c.delta);
}

void from_json(const json& j, RunConfig& c) {
  j.at("input").get_to(c.input);
  c.command = parse_command(j.at("command").get<std::string>());
  j.at("d").get_to(c.d);
  j.at("eps").get_to(c.eps);
  j.at("m").get_to(c.m);
  j.at("q").get_to(c.q);
  j.at("inner_tol").get_to(c.inner_tol);
  j.at("inner_maxit").get_to(c.inner_maxit);
  j.at("solver").get_to(c.solver);
  j.at("precond").get_to(c.precond);
  j.at("trim").get_to(c.trim);
  get_optional(j, "delta", c.delta);
  j.at("sigma0").get_to(c.sigma0);
  j.at("seed").get_to(c.seed);
  j.at("output").get_to(c.output);
  j.at("history").get_to(c.history);
  j.at("vectors").get_to(c.vectors);
  j.at("dump_laplacian").get_to(c.dump_laplacian);
  j.at("validate").get_to(c.validate);
}

void to_json(json& j, const VerifySummary& v) {
  j = json{{"max_residual", v.max_residual},
           {"orthogonality_defect", v.orthogonality_defect},
           {"kernel_defect", v.kernel_defect},
           {"oracle_checked", v.oracle_checked},
           {"skipped_eigenvalue", v.skipped_eigenvalue},
           {"passed", v.passed}};
  put_optional(j, "max_eigenvalue_error", v.max_eigenvalue_error);
}

void from_json(const json& j, VerifySummary& v) {
  j.at("max_residual").get_to(v.max_residual);
  j.at("orthogonality_defect").get_to(v.orthogonality_defect);
  j.at("kernel_defect").get_to(v.kernel_defect);
  j.at("oracle_checked").get_to(v.oracle_checked);
  get_optional(j, "max_eigenvalue_error", v.max_eigenvalue_error);
  j.at("skipped_eigenvalue").get_to(v.skipped_eigenvalue);
  j.at("passed").get_to(v.passed);
}

void to_json(json& j, const RunRecord& r) {
  json hist = json::array();
  for (const auto& h : r.history)
    hist.push_back({{"sweep", h.sweep},
                    {"outer", h.outer},
                    {"k", h.k},
                    {"theta1", h.theta1},
                    {"resnorm", h.resnorm},
                    {"sigma", h.sigma},
                    {"inner_iterations", h.inner_iterations}});
  j = json{{"method", r.method},
           {"config", r.config},
           {"n_input", r.n_input},
           {"n", r.n},
           {"nnz", r.nnz},
           {"components", r.components},
           {"vertex_map", r.vertex_map},
           {"status", r.status},
           {"message", r.message},
           {"trim_index", r.trim_index},
           {"delta", r.delta},
           {"eigenvalues", r.eigenvalues},
           {"residuals", r.residuals},
           {"outer_iterations", r.outer_iterations},
           {"inner_iterations", r.inner_iterations},
           {"inner_failures", r.inner_failures},
           {"history", std::move(hist)},
           {"timings", r.timings}};
  put_optional(j, "max_deviation", r.max_deviation);
  j["verification"] = r.verification ? json(*r.verification) : json(nullptr);
}

void from_json(const json& j, RunRecord& r) {
  j.at("method").get_to(r.method);
  j.at("config").get_to(r.config);
  j.at("n_input").get_to(r.n_input);
  j.at("n").get_to(r.n);
  j.at("nnz").get_to(r.nnz);
  j.at("components").get_to(r.components);
  j.at("vertex_map").get_to(r.vertex_map);
  j.at("status").get_to(r.status);
  j.at("message").get_to(r.message);
  j.at("trim_index").get_to(r.trim_index);
  j.at("delta").get_to(r.delta);
  j.at("eigenvalues").get_to(r.eigenvalues);
  j.at("residuals").get_to(r.residuals);
  j.at("outer_iterations").get_to(r.outer_iterations);
  j.at("inner_iterations").get_to(r.inner_iterations);
  j.at("inner_failures").get_to(r.inner_failures);
  r.history.clear();
  for (const auto& h : j.at("history")) {
    IterationRecord rec;
    h.at("sweep").get_to(rec.sweep);
    h.at("outer").get_to(rec.outer);
    h.at("k").get_to(rec.k);
    h.at("theta1").get_to(rec.theta1);
    h.at("resnorm").get_to(rec.resnorm);
    h.at("sigma").get_to(rec.sigma);
    h.at("inner_iterations").get_to(rec.inner_iterations);
    r.history.push_back(rec);
  }
  get_optional(j, "max_deviation", r.max_deviation);
  get_optional(j, "verification", r.verification);
  j.at("timings").get_to(r.timings);
}

void to_json(json& j, const ComponentReport& r) {
  j = json{{"n_input", r.n_input}, {"edges", r.edges}, {"sizes", r.sizes}, {"largest", r.largest}};
}

void from_json(const json& j, ComponentReport& r) {
  j.at("n_input").get_to(r.n_input);
  j.at("edges").get_to(r.edges);
  j.at("sizes").get_to(r.sizes);
  j.at("largest").get_to(r.largest);
}

json stable_json(const RunRecord& r) {
  json j = r;
  j.erase("timings");
  return j;
}

// ---------------------------------------------------------------------------
// pipelines

EdgeList load_edge_list(const std::string& path) {
  if (path == "-") return parse_edge_list(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return parse_edge_list(in);
}

SolveRun run_solve(const RunConfig& cfg) {
  cfg.sira();
  const auto t = Clock::now();
  const Prepared p = prepare(cfg);
  SolveRun out = solve_prepared(cfg, p, false);
  out.record.timings["total"] = seconds_since(t);
  return out;
}

SolveRun run_verify(const RunConfig& cfg) {
  cfg.sira();
  const auto t = Clock::now();
  const Prepared p = prepare(cfg);
  SolveRun out = solve_prepared(cfg, p, true);
  out.record.timings["total"] = seconds_since(t);
  return out;
}

std::vector<RunRecord> run_bench(const RunConfig& cfg, double tau) {
  cfg.sira();
  const Prepared p = prepare(cfg);
  std::vector<RunRecord> out;
  out.push_back(solve_prepared(cfg, p, false).record);
  out.back().timings["total"] = total_time(out.back().timings);
  const std::vector<double> ref = out.front().eigenvalues;

  auto baseline = [&](const char* method, auto&& compute) {
    RunRecord r = base_record(cfg, p);
    r.method = method;
    if (p.L.size() > oracle::max_dense_order) {
      r.status = "skipped";
      r.message = "n = " + std::to_string(p.L.size()) + " exceeds the dense limit " +
                  std::to_string(oracle::max_dense_order);
    } else {
      const auto t = Clock::now();
      r.eigenvalues = compute();
      r.timings["solve"] = seconds_since(t);
      r.status = "converged";
      double dev = 0.0;
      for (std::size_t k = 0; k < std::min(ref.size(), r.eigenvalues.size()); ++k)
        dev = std::max(dev, std::abs(ref[k] - r.eigenvalues[k]));
      if (ref.size() != r.eigenvalues.size()) dev = std::numeric_limits<double>::infinity();
      r.max_deviation = dev;
    }
    r.timings["total"] = total_time(r.timings);
    out.push_back(std::move(r));
  };
  baseline("perturbed", [&] { return oracle::baseline_perturbed(p.L, tau, cfg.d); });
  baseline("nullspace_deflated", [&] { return oracle::baseline_nullspace_deflated(p.L, cfg.d); });
  return out;
}

std::vector<RunRecord> run_trim_ablation(const RunConfig& cfg) {
  cfg.sira();
  const Prepared p = prepare(cfg);
  std::vector<RunRecord> out;
  for (const char* policy : {"min-degree", "0", "max-degree"}) {
    RunConfig c = cfg;
    c.trim = policy;
    out.push_back(solve_prepared(c, p, false).record);
    out.back().timings["total"] = total_time(out.back().timings);
  }
  return out;
}

ComponentReport run_components(const RunConfig& cfg) {
  const Graph g = build_graph(load_edge_list(cfg.input));
  const auto cc = connected_components(g);
  ComponentReport r;
  r.n_input = g.n;
  r.edges = g.edge_count();
  r.sizes = cc.sizes;
  for (std::int64_t c = 1; c < cc.count(); ++c)
    if (cc.sizes[static_cast<std::size_t>(c)] > cc.sizes[static_cast<std::size_t>(r.largest)]) r.largest = c;
  return r;
}

int exit_code(const RunRecord& r) { return r.status == "converged" || r.status == "skipped" ? 0 : 2; }

int exit_code(const std::vector<RunRecord>& rs) {
  int code = 0;
  for (const auto& r : rs) code = std::max(code, exit_code(r));
  return code;
}

// ---------------------------------------------------------------------------
// writers

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "sweep,outer_iter,k,theta1,resnorm,sigma,inner_iters\n";
  os << std::setprecision(17);
  for (const auto& h : history)
    os << h.sweep << ',' << h.outer << ',' << h.k << ',' << h.theta1 << ',' << h.resnorm << ',' << h.sigma << ','
       << h.inner_iterations << '\n';
}

namespace {

constexpr std::uint32_t vectors_magic = 0x56454C47u;  // "GLEV" read as little-endian bytes

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("truncated vector file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_vectors(std::ostream& os, const Eigen::MatrixXd& V) {
  put_le<std::uint32_t>(os, vectors_magic);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(V.rows()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(V.cols()));
  for (Eigen::Index c = 0; c < V.cols(); ++c)
    for (Eigen::Index r = 0; r < V.rows(); ++r) put_le<double>(os, V(r, c));
}

Eigen::MatrixXd read_vectors(std::istream& is) {
  if (get_le<std::uint32_t>(is) != vectors_magic) throw std::runtime_error("not an eigenvector file");
  const auto n = get_le<std::uint64_t>(is);
  const auto d = get_le<std::uint32_t>(is);
  Eigen::MatrixXd V(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < V.cols(); ++c)
    for (Eigen::Index r = 0; r < V.rows(); ++r) V(r, c) = get_le<double>(is);
  return V;
}

void write_edge_list(std::ostream& os, const EdgeList& el) {
  if (el.n_declared) os << "% " << el.edges.size() << ' ' << *el.n_declared << ' ' << *el.n_declared << '\n';
  for (const auto& e : el.edges) {
    os << e.u << ' ' << e.v;
    if (e.weight != 1.0) os << ' ' << std::setprecision(17) << e.weight;
    os << '\n';
  }
}

void write_table(std::ostream& os, const std::vector<RunRecord>& rs) {
  os << std::left << std::setw(20) << "code" << std::setw(16) << "trim" << std::right << std::setw(10) << "n"
     << std::setw(12) << "nnz" << std::setw(10) << "outer" << std::setw(10) << "inner" << std::setw(12) << "time[s]"
     << std::setw(14) << "deviation" << "  status\n";
  for (const auto& r : rs) {
    const auto total = r.timings.count("total") ? r.timings.at("total") : 0.0;
    std::ostringstream dev;
    if (r.max_deviation) dev << std::scientific << std::setprecision(2) << *r.max_deviation;
    else dev << "-";
    os << std::left << std::setw(20) << r.method << std::setw(16)
       << (r.method == "isira" ? r.config.trim + "(" + std::to_string(r.trim_index) + ")" : std::string("-"))
       << std::right << std::setw(10) << r.n << std::setw(12) << r.nnz << std::setw(10) << r.outer_iterations
       << std::setw(10) << r.inner_iterations << std::setw(12) << std::fixed << std::setprecision(3) << total
       << std::setw(14) << dev.str() << "  " << r.status;
    os.unsetf(std::ios::floatfield);
    if (!r.message.empty()) os << " (" << r.message << ")";
    os << '\n';
  }
}

}  // namespace glsira
