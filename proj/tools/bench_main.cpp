// bench: seed-sweep driver for the ARPQN solvers.
//
//   bench --problem cm --n 64,128 --r 4 --mu 0.1 --mode nls --retraction svd \
//         --seeds 50 --out results.csv [--config key=val ...] [--trace-dir dir]

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "arpqn/bench.hpp"
#include "arpqn/kernels.hpp"

namespace {

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seed-sweep benchmark for adaptive regularized proximal quasi-Newton on St(n,r)"};

  std::string problem = "cm";
  std::vector<std::string> ns, rs, mus;
  std::vector<std::string> modes{"nls"};
  std::vector<std::string> retractions{"svd"};
  int seeds = 50;
  std::uint64_t base_seed = 1;
  std::string out_path;
  std::vector<std::string> overrides;
  std::string trace_dir;
  std::string dump_instance;
  unsigned threads = 0;

  app.add_option("--problem", problem, "cm | spca")->check(CLI::IsMember({"cm", "spca"}));
  app.add_option("--n", ns, "problem sizes (comma separated)")->required();
  app.add_option("--r", rs, "column counts (comma separated)")->required();
  app.add_option("--mu", mus, "l1 weights (comma separated)")->required();
  app.add_option("--mode", modes, "arpqn | nls | pg (comma separated)");
  app.add_option("--retraction", retractions, "svd | qr | cayley (comma separated)");
  app.add_option("--seeds", seeds, "runs per configuration")->check(CLI::PositiveNumber);
  app.add_option("--base-seed", base_seed, "seed of the first run");
  app.add_option("--out", out_path, "summary CSV path")->required();
  app.add_option("--config", overrides, "solver/problem override key=value (repeatable)");
  app.add_option("--trace-dir", trace_dir, "write one per-iteration CSV per run here");
  app.add_option("--threads", threads, "worker threads (default: BENCH_THREADS or all cores)");
  app.add_option("--dump-instance", dump_instance,
                 "write the data matrix (H or A) of the first instance as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    arpqn::ExperimentSpec spec;
    spec.problem = arpqn::parse_problem(problem);
    for (const auto& s : split_list(ns)) spec.ns.push_back(std::stol(s));
    for (const auto& s : split_list(rs)) spec.rs.push_back(std::stol(s));
    for (const auto& s : split_list(mus)) spec.mus.push_back(std::stod(s));
    spec.modes.clear();
    for (const auto& s : split_list(modes)) spec.modes.push_back(arpqn::parse_mode(s));
    spec.retractions.clear();
    for (const auto& s : split_list(retractions))
      spec.retractions.push_back(arpqn::parse_retraction(s));
    spec.seeds = seeds;
    spec.base_seed = base_seed;
    spec.threads = threads;
    for (const auto& o : overrides) spec.apply_override(o);
    if (!trace_dir.empty()) spec.trace_dir = trace_dir;
    spec.validate();

    if (!dump_instance.empty()) {
      const arpqn::Index n = spec.ns.front();
      if (spec.problem == arpqn::ProblemKind::Cm) {
        arpqn::write_matrix_csv(dump_instance, arpqn::CmOperator(n, spec.cm).dense(), 0);
      } else {
        arpqn::write_matrix_csv(dump_instance, arpqn::spca_data(n, spec.base_seed, spec.spca),
                                spec.base_seed);
      }
    }

    std::cerr << "kernels: " << arpqn::kernels::backend_name(arpqn::kernels::active().backend)
              << '\n';
    const auto rows = arpqn::run_experiment(spec);
    arpqn::emit_csv(rows, out_path);
    arpqn::write_summary_csv(std::cout, rows);
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
