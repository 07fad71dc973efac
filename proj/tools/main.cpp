// tenkit command-line front end: synthetic data generation, sequential and
// virtual-distributed decomposition runs, and processor-grid exploration.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tenkit/dense_tensor.hpp"
#include "tenkit/kruskal.hpp"
#include "tenkit/nncp.hpp"
#include "tenkit/par/grid_search.hpp"
#include "tenkit/par/par_nncp.hpp"
#include "tenkit/tensor_io.hpp"
#include "tenkit/trace.hpp"

namespace {

std::vector<std::uint64_t> parse_dims(const std::string& text, const char* what) {
  std::vector<std::uint64_t> dims;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty()) break;
    dims.push_back(std::stoull(part));
  }
  if (dims.empty()) throw CLI::ValidationError(std::string(what) + ": expected AxBxC...");
  return dims;
}

std::string dims_to_string(std::span<const std::uint64_t> dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

/// Inserts a _R<rank> suffix before the extension for rank sweeps.
std::filesystem::path with_rank_suffix(const std::filesystem::path& path, std::size_t rank,
                                       bool sweep) {
  if (!sweep) return path;
  std::filesystem::path p = path;
  const std::string stem = p.stem().string();
  const std::string ext = p.extension().string();
  p.replace_filename(stem + "_R" + std::to_string(rank) + ext);
  return p;
}

struct RunOptions {
  std::string input_path;
  std::string synth_dims;
  std::size_t synth_rank = 0;
  std::uint64_t synth_seed = 0;
  bool synth_ones = false;

  std::size_t rank = 0;
  std::string rank_sweep;
  std::size_t iters = 100;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string nls = "bpp";
  bool no_dimtree = false;

  std::string grid;
  std::uint64_t procs = 0;
  std::string workers = "sim";
  bool pad = false;
  bool check_replication = false;
  double alpha = 0.0;
  double beta = 0.0;

  std::string trace_path;
  std::string ledger_path;
  std::string out_path;
  bool timers = false;
};

int cmd_gen(const std::string& dims_text, std::size_t rank, std::uint64_t seed,
            const std::string& out, bool ones) {
  const auto dims = parse_dims(dims_text, "--dims");
  const tenkit::KruskalModel model = tenkit::synthetic_model(dims, rank, seed, ones);
  const tenkit::DenseTensor tensor = model.expand();
  tenkit::write_tensor(std::filesystem::path(out), tensor);
  tenkit::write_model(std::filesystem::path(out + ".model"), model);
  std::cout << "wrote " << dims_to_string(dims) << " tensor (" << tensor.numel()
            << " entries) to " << out << "\n"
            << "generating model (rank " << rank << ") in " << out << ".model\n";
  return 0;
}

void print_phase_totals(const tenkit::IterationTrace& trace) {
  double mttkrp = 0, krp = 0, factor_comm = 0, nls = 0, err = 0;
  for (const auto& r : trace.rows) {
    mttkrp += r.t_pm + r.t_mttv;
    krp += r.t_krp;
    factor_comm += r.t_factor_comm;
    nls += r.t_nls + r.t_gram + r.t_gram_comm;
    err += r.t_err;
  }
  std::cout << "phase totals (s): MTTKRP=" << mttkrp << " KRP=" << krp
            << " FactorComm=" << factor_comm << " NLS=" << nls << " Error=" << err << "\n";
}

std::vector<std::size_t> ranks_to_run(const RunOptions& opt) {
  if (opt.rank_sweep.empty()) {
    if (opt.rank == 0) throw CLI::ValidationError("--rank (or --rank-sweep) is required");
    return {opt.rank};
  }
  std::size_t a = 0, b = 0, step = 1;
  std::stringstream ss(opt.rank_sweep);
  std::string part;
  std::vector<std::size_t> abc;
  while (std::getline(ss, part, ':')) abc.push_back(std::stoull(part));
  if (abc.size() == 2)
    a = abc[0], b = abc[1];
  else if (abc.size() == 3)
    a = abc[0], b = abc[1], step = abc[2];
  else
    throw CLI::ValidationError("--rank-sweep: expected a:b or a:b:step");
  if (a == 0 || step == 0 || b < a) throw CLI::ValidationError("--rank-sweep: bad range");
  std::vector<std::size_t> ranks;
  for (std::size_t r = a; r <= b; r += step) ranks.push_back(r);
  return ranks;
}

int cmd_run(const RunOptions& opt) {
  const bool have_input = !opt.input_path.empty();
  const bool have_synth = !opt.synth_dims.empty();
  if (have_input == have_synth)
    throw CLI::ValidationError("exactly one of --in or --synth must be given");

  tenkit::DenseTensor tensor;
  if (have_input) {
    tensor = tenkit::read_tensor(std::filesystem::path(opt.input_path));
  } else {
    if (opt.synth_rank == 0) throw CLI::ValidationError("--synth requires --synth-rank");
    const auto dims = parse_dims(opt.synth_dims, "--synth");
    tensor = tenkit::synthetic_model(dims, opt.synth_rank, opt.synth_seed, opt.synth_ones)
                 .expand();
  }

  const bool parallel = !opt.grid.empty();
  std::vector<std::uint64_t> grid_dims;
  if (parallel) {
    if (opt.grid == "auto") {
      if (opt.procs == 0) throw CLI::ValidationError("--grid auto requires --procs");
      grid_dims = tenkit::par::optimize_grid(tensor.dims(), opt.procs).grid_dims;
      std::cout << "auto grid: " << dims_to_string(grid_dims) << "\n";
    } else {
      grid_dims = parse_dims(opt.grid, "--grid");
    }
  }

  const auto ranks = ranks_to_run(opt);
  const bool sweep = ranks.size() > 1;
  for (std::size_t r : ranks) {
    tenkit::NncpConfig base;
    base.rank = r;
    base.max_outer_iters = opt.iters;
    base.tolerance = opt.tol;
    base.seed = opt.seed;
    base.nls = opt.nls == "hals" ? tenkit::NlsMethod::hals : tenkit::NlsMethod::bpp;
    base.use_dimension_tree = !opt.no_dimtree;

    tenkit::KruskalModel model;
    tenkit::IterationTrace trace;
    std::vector<tenkit::par::CommRecord> comm;
    if (parallel) {
      tenkit::par::ParNncpConfig cfg;
      cfg.base = base;
      cfg.grid_dims = grid_dims;
      cfg.mode = opt.workers == "threads" ? tenkit::par::ExecutionMode::threaded
                                          : tenkit::par::ExecutionMode::simulated;
      cfg.allow_padding = opt.pad;
      cfg.cost_model = {opt.alpha, opt.beta};
      cfg.validate_replication = opt.check_replication;
      auto res = tenkit::par::par_nncp(tensor, cfg);
      model = std::move(res.model);
      trace = std::move(res.trace);
      comm = std::move(res.comm);
    } else {
      auto res = tenkit::nncp(tensor, base);
      model = std::move(res.model);
      trace = std::move(res.trace);
    }

    std::cout << "rank " << r << ": " << trace.rows.size() << " outer iterations, final eps = ";
    {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", trace.final_eps());
      std::cout << buf << "\n";
    }
    print_phase_totals(trace);

    if (!opt.out_path.empty())
      tenkit::write_model(with_rank_suffix(opt.out_path, r, sweep), model);
    if (!opt.trace_path.empty()) {
      std::ofstream os(with_rank_suffix(opt.trace_path, r, sweep));
      tenkit::write_trace_csv(os, trace, opt.timers);
    }
    if (!opt.ledger_path.empty()) {
      std::ofstream os(with_rank_suffix(opt.ledger_path, r, sweep));
      tenkit::par::write_ledger_csv(os, comm);
    }
  }
  return 0;
}

int cmd_grid(const std::string& dims_text, std::uint64_t procs, std::size_t rank) {
  const auto dims = parse_dims(dims_text, "--dims");
  const auto grids = tenkit::par::enumerate_grids(procs, dims.size());

  // One row per unordered shape, scored by its best ordered assignment
  // (lowest objective; ties toward the lexicographically smallest grid, the
  // same rule the optimizer uses).
  struct Row {
    std::vector<std::uint64_t> shape;
    std::vector<std::uint64_t> assignment;
    double objective;
  };
  std::map<std::vector<std::uint64_t>, Row> shapes;
  for (const auto& g : grids) {
    double objective = 0.0;
    for (std::size_t n = 0; n < dims.size(); ++n)
      objective += static_cast<double>(dims[n]) / static_cast<double>(g[n]);
    auto shape = g;
    std::sort(shape.begin(), shape.end(), std::greater<>());
    auto it = shapes.find(shape);
    if (it == shapes.end() || objective < it->second.objective ||
        (objective == it->second.objective && g < it->second.assignment))
      shapes[shape] = Row{shape, g, objective};
  }

  const auto best = tenkit::par::optimize_grid(dims, procs, rank);
  std::vector<Row> rows;
  for (const auto& [shape, row] : shapes) rows.push_back(row);
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.shape < b.shape;
  });

  std::cout << "grids for " << dims_to_string(dims) << " on " << procs << " workers ("
            << rows.size() << " shapes)\n";
  std::cout << "  shape           best order      sum(In/Pn)      comm words (R=" << rank
            << ")\n";
  for (const auto& row : rows) {
    const bool optimal = row.assignment == best.grid_dims;
    std::cout << (optimal ? "* " : "  ");
    std::string shape = dims_to_string(row.shape);
    shape.resize(std::max<std::size_t>(shape.size(), 15), ' ');
    std::string assign = dims_to_string(row.assignment);
    assign.resize(std::max<std::size_t>(assign.size(), 15), ' ');
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-15.6g %.6g", row.objective,
                  row.objective * static_cast<double>(rank));
    std::cout << shape << ' ' << assign << ' ' << buf << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense nonnegative CP decomposition toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate an exact low-rank synthetic tensor file");
  std::string gen_dims, gen_out;
  std::size_t gen_rank = 0;
  std::uint64_t gen_seed = 0;
  bool gen_ones = false;
  gen->add_option("--dims", gen_dims, "tensor extents, e.g. 8x8x8")->required();
  gen->add_option("--rank", gen_rank, "generating rank")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output tensor path")->required();
  gen->add_flag("--ones", gen_ones, "force all generating factors to ones (debug)");

  // run
  auto* run = app.add_subcommand("run", "run a decomposition");
  RunOptions opt;
  run->add_option("--in", opt.input_path, "input tensor file");
  run->add_option("--synth", opt.synth_dims, "generate the input in memory, e.g. 16x16x16");
  run->add_option("--synth-rank", opt.synth_rank, "generating rank for --synth");
  run->add_option("--synth-seed", opt.synth_seed, "generator seed for --synth");
  run->add_flag("--synth-ones", opt.synth_ones, "all-ones generating factors for --synth");
  run->add_option("--rank", opt.rank, "decomposition rank");
  run->add_option("--rank-sweep", opt.rank_sweep, "a:b[:step] runs several ranks");
  run->add_option("--iters", opt.iters, "maximum outer iterations");
  run->add_option("--tol", opt.tol, "stop when |eps change| drops below this (0: fixed count)");
  run->add_option("--seed", opt.seed, "initialization seed");
  run->add_option("--nls", opt.nls, "nonnegative update: bpp or hals")
      ->check(CLI::IsMember({"bpp", "hals"}));
  run->add_flag("--no-dimtree", opt.no_dimtree, "disable dimension-tree reuse");
  run->add_option("--grid", opt.grid, "worker grid PxQx... or 'auto' (omit: sequential)");
  run->add_option("--procs", opt.procs, "worker count for --grid auto");
  run->add_option("--workers", opt.workers, "execution mode: sim or threads")
      ->check(CLI::IsMember({"sim", "threads"}));
  run->add_flag("--pad", opt.pad, "zero-pad extents the grid does not divide");
  run->add_flag("--check-replication", opt.check_replication,
                "verify slice replicas bitwise each inner iteration");
  run->add_option("--alpha", opt.alpha, "model latency per message (s)");
  run->add_option("--beta", opt.beta, "model time per word (s)");
  run->add_option("--trace", opt.trace_path, "write per-iteration trace CSV");
  run->add_option("--ledger", opt.ledger_path, "write collective ledger CSV");
  run->add_option("--out", opt.out_path, "write the final model");
  run->add_flag("--timers", opt.timers, "include measured wall-clock timers in the trace CSV");

  // grid
  auto* gridc = app.add_subcommand("grid", "list processor grids and their communication cost");
  std::string grid_dims;
  std::uint64_t grid_procs = 0;
  std::size_t grid_rank = 1;
  gridc->add_option("--dims", grid_dims, "tensor extents")->required();
  gridc->add_option("--procs", grid_procs, "worker count")->required()->check(CLI::PositiveNumber);
  gridc->add_option("--rank", grid_rank, "rank used for the words column");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(gen_dims, gen_rank, gen_seed, gen_out, gen_ones);
    if (run->parsed()) return cmd_run(opt);
    if (gridc->parsed()) return cmd_grid(grid_dims, grid_procs, grid_rank);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
