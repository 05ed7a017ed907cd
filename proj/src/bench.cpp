#include "arpqn/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace arpqn {

std::string_view to_string(ProblemKind kind) {
  return kind == ProblemKind::Cm ? "cm" : "spca";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "cm") return ProblemKind::Cm;
  if (name == "spca") return ProblemKind::Spca;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  if (ns.empty() || rs.empty() || mus.empty() || modes.empty() || retractions.empty())
    throw std::invalid_argument("ExperimentSpec: every sweep list must be nonempty");
  if (seeds < 1) throw std::invalid_argument("ExperimentSpec: seeds must be >= 1");
  config.validate();
}

void ExperimentSpec::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
  const std::string_view key = assignment.substr(0, eq);
  const std::string value(assignment.substr(eq + 1));
  if (key == "cm_boundary") {
    cm.boundary = parse_boundary(value);
  } else if (key == "cm_kinetic") {
    cm.kinetic_factor = std::stod(value);
  } else if (key == "cm_length") {
    cm.domain_length = std::stod(value);
  } else if (key == "spca_m") {
    spca.m = std::stol(value);
  } else if (key == "spca_normalize") {
    spca.normalize_columns = value == "1" || value == "true";
  } else {
    config.set(key, value);
  }
}

std::string format_sig6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string row_label(ProblemKind kind, Index n, Index r, double mu, Mode mode,
                      RetractionKind retraction) {
  return std::string(to_string(kind)) + "/n=" + std::to_string(n) + "/r=" + std::to_string(r) +
         "/mu=" + format_sig6(mu) + "/" + std::string(to_string(mode)) + "/" +
         std::string(to_string(retraction));
}

RunOutcome run_single(ProblemKind kind, Index n, Index r, double mu, std::uint64_t seed,
                      const SolverConfig& config, const CmOptions& cm, const SpcaOptions& spca,
                      std::vector<TraceRecord>* trace_out) {
  RunOutcome out;
  try {
    const CompositeProblem problem =
        kind == ProblemKind::Cm ? make_cm(n, r, mu, cm) : make_spca(n, r, mu, seed, spca);
    const StiefelPoint x0 = random_point(n, r, seed);

    const auto t0 = std::chrono::steady_clock::now();
    SolveResult res = solve(problem, x0, config);
    const auto t1 = std::chrono::steady_clock::now();

    out.status = res.status;
    out.iterations = res.iterations;
    out.objective = res.objective;
    out.sparsity = sparsity(res.x.matrix());
    out.cpu_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.backtracks = res.total_backtracks;
    out.ssn_per_step = res.total_subproblems > 0
                           ? static_cast<double>(res.total_ssn_iters) /
                                 static_cast<double>(res.total_subproblems)
                           : 0.0;
    if (!std::isfinite(out.objective)) {
      out.failed = true;
      out.error = "non-finite objective";
    }
    if (trace_out != nullptr) *trace_out = std::move(res.trace);
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

namespace {

struct Task {
  std::size_t row;
  Index n;
  Index r;
  double mu;
  Mode mode;
  RetractionKind retraction;
  std::uint64_t seed;
};

unsigned pool_size(unsigned requested, std::size_t tasks) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("BENCH_THREADS")) n = static_cast<unsigned>(std::atoi(env));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

std::string trace_file_name(const std::string& label, std::uint64_t seed) {
  std::string name = label;
  for (char& c : name)
    if (c == '/' || c == '=') c = '_';
  return name + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace

std::vector<SummaryRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  std::vector<SummaryRow> rows;
  std::vector<Task> tasks;
  for (Mode mode : spec.modes)
    for (RetractionKind ret : spec.retractions)
      for (Index n : spec.ns)
        for (Index r : spec.rs)
          for (double mu : spec.mus) {
            const std::size_t row = rows.size();
            rows.push_back(SummaryRow{row_label(spec.problem, n, r, mu, mode, ret)});
            for (int i = 0; i < spec.seeds; ++i)
              tasks.push_back(Task{row, n, r, mu, mode, ret,
                                   spec.base_seed + static_cast<std::uint64_t>(i)});
          }

  if (spec.trace_dir) std::filesystem::create_directories(*spec.trace_dir);

  std::vector<RunOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const Task& t = tasks[i];
      SolverConfig cfg = spec.config;
      cfg.mode = t.mode;
      cfg.retraction = t.retraction;
      std::vector<TraceRecord> trace;
      outcomes[i] = run_single(spec.problem, t.n, t.r, t.mu, t.seed, cfg, spec.cm, spec.spca,
                               spec.trace_dir ? &trace : nullptr);
      if (spec.trace_dir && !outcomes[i].failed) {
        const auto path = std::filesystem::path(*spec.trace_dir) /
                          trace_file_name(rows[t.row].label, t.seed);
        std::ofstream f(path);
        write_trace_csv(f, trace);
      }
    }
  };

  const unsigned nthreads = pool_size(spec.threads, tasks.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }

  // Aggregate in task order so sums are independent of scheduling.
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    SummaryRow& row = rows[tasks[i].row];
    const RunOutcome& o = outcomes[i];
    if (o.failed) {
      ++row.failures;
      continue;
    }
    ++row.runs;
    row.iter += static_cast<double>(o.iterations);
    row.f += o.objective;
    row.sparsity += o.sparsity;
    row.cpu_s += o.cpu_seconds;
    row.linesearch += static_cast<double>(o.backtracks);
    row.ssn_iters += o.ssn_per_step;
  }
  for (SummaryRow& row : rows) {
    if (row.runs == 0) {
      row.iter = row.f = row.sparsity = row.cpu_s = row.linesearch = row.ssn_iters = 0.0;
      continue;
    }
    const double k = static_cast<double>(row.runs);
    row.iter /= k;
    row.f /= k;
    row.sparsity /= k;
    row.cpu_s /= k;
    row.linesearch /= k;
    row.ssn_iters /= k;
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "label,iter,F,sparsity,cpu_s,linesearch,ssn_iters,failures\n";
  for (const auto& r : rows) {
    out << r.label << ',' << format_sig6(r.iter) << ',' << format_sig6(r.f) << ','
        << format_sig6(r.sparsity) << ',' << format_sig6(r.cpu_s) << ','
        << format_sig6(r.linesearch) << ',' << format_sig6(r.ssn_iters) << ',' << r.failures
        << '\n';
  }
}

void emit_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  write_summary_csv(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

}  // namespace arpqn
