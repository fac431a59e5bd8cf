// Command-line front end: solve a single instance, compare the hybrid solver
// against the proximal-gradient baseline, or check a candidate point for
// approximate stationarity.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparseq/sparseq.hpp"

namespace {

using sparseq::Index;
using sparseq::Vector;

struct CommonOpts {
  std::string data;
  std::string loss = "ls";
  double lambda_c = 1e-2;
  double q = 0.5;
  double tol = 1e-3;
  long max_iters = 50000;
  std::string solver = "hpgsrn";
  std::string trace_out;
  std::string trace_format = "csv";
  std::uint64_t seed = 0;
  std::string warm_start;
  std::string stopping = "practical";
  double epsilon = 0.0;
  bool no_timing = false;
  long n_features = 0;
};

void add_data_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--data", o.data, "LIBSVM-format input file")->required();
  cmd->add_option("--loss", o.loss, "loss model: ls or logistic")
      ->check(CLI::IsMember({"ls", "logistic"}));
  cmd->add_option("--lambda-c", o.lambda_c,
                  "regularization factor; lambda is scaled from the data")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--q", o.q, "exponent of the |x_i|^q penalty, in (0,1)")
      ->check([](const std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v < 1.0) return {};
        } catch (const std::exception&) {
        }
        return "q must lie strictly between 0 and 1";
      });
  cmd->add_option("--n-features", o.n_features,
                  "force the feature count (columns of A)");
  cmd->set_config("--config", "", "read key=value defaults from a file");
}

void add_solver_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--tol", o.tol, "practical stopping tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", o.max_iters, "iteration cap");
  cmd->add_option("--seed", o.seed, "seed for the randomized pieces");
  cmd->add_option("--warm-start", o.warm_start,
                  "JSON vector file to start from (default: the origin)");
  cmd->add_option("--stopping", o.stopping, "stopping rule")
      ->check(CLI::IsMember({"practical", "s2", "both"}));
  cmd->add_option("--epsilon", o.epsilon, "threshold of the s2 stopping rule");
  cmd->add_flag("--no-timing", o.no_timing,
                "write elapsed columns as 0 (byte-stable traces)");
}

sparseq::LossKind parse_loss_kind(const std::string& name) {
  return name == "logistic" ? sparseq::LossKind::logistic
                            : sparseq::LossKind::least_squares;
}

sparseq::StoppingMode parse_stopping(const std::string& name) {
  if (name == "s2") return sparseq::StoppingMode::s2;
  if (name == "both") return sparseq::StoppingMode::both;
  return sparseq::StoppingMode::practical;
}

struct LoadedProblem {
  sparseq::ProblemInstance problem;
  double lambda;
};

LoadedProblem load_problem(const CommonOpts& o) {
  sparseq::Dataset data = sparseq::parse_libsvm(o.data, o.n_features);
  const sparseq::LossKind kind = parse_loss_kind(o.loss);
  const double lambda = sparseq::lambda_from_scaling(data, kind, o.lambda_c);
  sparseq::LossModel loss = kind == sparseq::LossKind::logistic
                                ? sparseq::LossModel::logistic(data.b)
                                : sparseq::LossModel::least_squares(data.b);
  if (loss.labels_remapped())
    std::cerr << "note: labels in {0,1} remapped to {-1,+1}\n";
  return LoadedProblem{
      sparseq::ProblemInstance(std::move(data.A), std::move(loss), lambda, o.q),
      lambda};
}

sparseq::SolverConfig make_config(const CommonOpts& o, sparseq::SolverKind kind) {
  sparseq::SolverConfig cfg = sparseq::SolverConfig::defaults(kind);
  cfg.practical_tol = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.seed = o.seed;
  cfg.stopping = parse_stopping(o.stopping);
  cfg.epsilon = o.epsilon;
  cfg.record_timing = !o.no_timing;
  return cfg;
}

Vector read_json_vector(const std::string& path, Index expected) {
  std::ifstream in(path);
  if (!in) throw sparseq::IoError("cannot open '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (!j.is_array()) throw sparseq::IoError("'" + path + "' is not a JSON array");
  Vector x(static_cast<Index>(j.size()));
  for (Index i = 0; i < x.size(); ++i)
    x[i] = j[static_cast<std::size_t>(i)].get<double>();
  if (expected > 0 && x.size() != expected)
    throw sparseq::IoError("vector in '" + path + "' has length " +
                           std::to_string(x.size()) + ", expected " +
                           std::to_string(expected));
  return x;
}

int threads_from_env() {
  const char* env = std::getenv("SPARSEQ_THREADS");
  if (!env) return 0;
  return std::max(0, std::atoi(env));
}

double final_residual(const sparseq::SolveResult& res,
                      const sparseq::ProblemInstance& prob) {
  if (res.gamma > 0.0)
    return sparseq::residual_practical(res.x_final, prob, res.gamma);
  return res.trace.empty() ? 0.0 : res.trace.back().residual_inf;
}

void print_summary_row(const std::string& name, const sparseq::SolveResult& res,
                       const sparseq::ProblemInstance& prob) {
  const double f_check = sparseq::full_objective(res.x_final, prob);
  const Index nnz = sparseq::SupportSet::of(res.x_final).size();
  std::printf("%-8s %-10s %8ld %8ld %22.15e %6ld %12.4e %10.4f\n", name.c_str(),
              sparseq::to_string(res.status), res.iterations,
              res.newton_iterations, f_check, static_cast<long>(nnz),
              final_residual(res, prob), res.time_seconds);
}

void print_summary_header() {
  std::printf("%-8s %-10s %8s %8s %22s %6s %12s %10s\n", "solver", "status",
              "iters", "newton", "F", "nnz", "residual", "time_s");
}

void write_trace(const sparseq::SolveResult& res, const CommonOpts& o,
                 const std::string& path) {
  if (path.empty()) return;
  if (o.trace_format == "json")
    sparseq::write_trace_json(res, path);
  else
    sparseq::write_trace_csv(res, path);
}

int status_code(const sparseq::SolveResult& res) {
  switch (res.status) {
    case sparseq::SolveStatus::converged: return 0;
    case sparseq::SolveStatus::max_iters: return 2;
    case sparseq::SolveStatus::aborted: return 1;
  }
  return 1;
}

int run_solve(const CommonOpts& o) {
  LoadedProblem lp = load_problem(o);
  const sparseq::SolverKind kind = o.solver == "pgls" ? sparseq::SolverKind::pgls
                                                      : sparseq::SolverKind::hpgsrn;
  sparseq::SolverConfig cfg = make_config(o, kind);
  Vector x0 = o.warm_start.empty() ? Vector(Vector::Zero(lp.problem.dim()))
                                   : read_json_vector(o.warm_start, lp.problem.dim());
  sparseq::SolveResult res = sparseq::solve(lp.problem, cfg, x0);
  write_trace(res, o, o.trace_out);
  std::printf("lambda = %.17g\n", lp.lambda);
  print_summary_header();
  print_summary_row(o.solver, res, lp.problem);
  if (res.status == sparseq::SolveStatus::aborted)
    std::cerr << "aborted: " << res.abort_reason << "\n";
  return status_code(res);
}

int run_compare(const CommonOpts& o) {
  LoadedProblem lp = load_problem(o);
  sparseq::SolverConfig cfg_h = make_config(o, sparseq::SolverKind::hpgsrn);
  sparseq::SolverConfig cfg_p = make_config(o, sparseq::SolverKind::pgls);
  Vector x0 = o.warm_start.empty() ? Vector(Vector::Zero(lp.problem.dim()))
                                   : read_json_vector(o.warm_start, lp.problem.dim());

  sparseq::SolveResult res_h, res_p;
  if (threads_from_env() >= 2) {
    std::thread th([&] { res_h = sparseq::solve(lp.problem, cfg_h, x0); });
    std::thread tp([&] { res_p = sparseq::solve(lp.problem, cfg_p, x0); });
    th.join();
    tp.join();
  } else {
    res_h = sparseq::solve(lp.problem, cfg_h, x0);
    res_p = sparseq::solve(lp.problem, cfg_p, x0);
  }
  if (!o.trace_out.empty()) {
    const std::size_t dot = o.trace_out.rfind('.');
    const std::string stem =
        dot == std::string::npos ? o.trace_out : o.trace_out.substr(0, dot);
    const std::string ext = dot == std::string::npos ? "" : o.trace_out.substr(dot);
    write_trace(res_h, o, stem + ".hpgsrn" + ext);
    write_trace(res_p, o, stem + ".pgls" + ext);
  }
  std::printf("lambda = %.17g\n", lp.lambda);
  print_summary_header();
  print_summary_row("hpgsrn", res_h, lp.problem);
  print_summary_row("pgls", res_p, lp.problem);
  return std::max(status_code(res_h), status_code(res_p));
}

int run_check(const CommonOpts& o, const std::string& x_path,
              const std::string& gamma_spec) {
  LoadedProblem lp = load_problem(o);
  Vector x = read_json_vector(x_path, lp.problem.dim());

  std::vector<double> gammas;
  if (!gamma_spec.empty()) {
    std::stringstream ss(gamma_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) gammas.push_back(std::stod(tok));
  } else {
    const double base = lp.problem.loss.lipschitz_estimate(lp.problem.A, o.seed) / 0.95;
    gammas = {base, 2.0 * base, 5.0 * base, 10.0 * base};
  }
  sparseq::StationarityReport rep = sparseq::stationarity_report(x, lp.problem, gammas);
  std::printf("lambda = %.17g\n", lp.lambda);
  std::printf("%16s %16s\n", "gamma", "residual_inf");
  for (const auto& e : rep.entries)
    std::printf("%16.8e %16.8e\n", e.gamma, e.residual);
  std::printf("min residual %.8e at gamma %.8e\n", rep.min_residual, rep.best_gamma);
  std::printf("support %ld, restricted gradient norm %.8e\n",
              static_cast<long>(rep.support_size), rep.subspace_grad_norm);
  std::printf("F = %.17g\n", sparseq::full_objective(x, lp.problem));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lq-regularized composite minimization (hybrid PG/Newton)"};
  app.require_subcommand(1);

  CommonOpts solve_opts, compare_opts, check_opts;
  std::string check_x, check_gammas;

  CLI::App* solve_cmd = app.add_subcommand("solve", "run one solver");
  add_data_options(solve_cmd, solve_opts);
  add_solver_options(solve_cmd, solve_opts);
  solve_cmd->add_option("--solver", solve_opts.solver, "hpgsrn or pgls")
      ->check(CLI::IsMember({"hpgsrn", "pgls"}));
  solve_cmd->add_option("--trace-out", solve_opts.trace_out, "trace output file");
  solve_cmd->add_option("--trace-format", solve_opts.trace_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "run hpgsrn and pgls on the same instance");
  add_data_options(compare_cmd, compare_opts);
  add_solver_options(compare_cmd, compare_opts);
  compare_cmd->add_option("--trace-out", compare_opts.trace_out,
                          "trace file stem; solver names are inserted");
  compare_cmd->add_option("--trace-format", compare_opts.trace_format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* check_cmd =
      app.add_subcommand("check", "stationarity report for a candidate point");
  add_data_options(check_cmd, check_opts);
  check_cmd->add_option("--x", check_x, "JSON vector file with the candidate")
      ->required();
  check_cmd->add_option("--gamma-grid", check_gammas,
                        "comma-separated moduli (default: scaled from the data)");
  check_cmd->add_option("--seed", check_opts.seed, "seed for the randomized pieces");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors exit 1 regardless of CLI11's own code
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve_opts);
    if (compare_cmd->parsed()) return run_compare(compare_opts);
    return run_check(check_opts, check_x, check_gammas);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
