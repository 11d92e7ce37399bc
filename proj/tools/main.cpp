// SPDX-License-Identifier: MIT
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcp/rcp.hpp"

namespace {

using rcp::Index;
using rcp::Shape;

struct SynthOptions {
  Shape shape;
  Index rank = 0;
  double snr = 0.0;
  bool noisy = false;
  bool toy = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
  std::string csv;
};

int run_synth(const SynthOptions& o) {
  rcp::TensorXd tensor;
  rcp::KruskalXd truth;
  if (o.toy) {
    Shape s = o.shape.empty() ? Shape{200, 200, 215} : o.shape;
    if (s.size() != 3 || s[0] != s[1])
      throw std::invalid_argument(
          "synth: --toy-video needs a GRID,GRID,FRAMES shape");
    std::tie(tensor, truth) = rcp::toy_video<double>(s[0], s[2], o.seed);
  } else {
    if (o.shape.empty())
      throw std::invalid_argument("synth: --shape is required");
    if (o.rank < 1) throw std::invalid_argument("synth: --rank is required");
    std::tie(tensor, truth) = rcp::random_lowrank<double>(o.shape, o.rank, o.seed);
  }
  if (!o.truth.empty()) rcp::io::write_kruskal(o.truth, truth);
  if (o.noisy) tensor = rcp::add_noise(tensor, rcp::NoiseSpec{o.snr, o.seed});
  rcp::io::write_tensor(o.out, tensor);
  if (!o.csv.empty()) rcp::io::write_tensor_csv(o.csv, tensor);
  return 0;
}

struct DecomposeOptions {
  std::string in;
  Index rank = 1;
  std::string method = "als";
  bool deterministic = false;
  Index oversample = 10;
  Index power_iters = 2;
  std::vector<Index> modes;
  bool modes_given = false;
  double tol = 1e-5;
  int max_iter = 500;
  std::uint64_t seed = 0;
  std::string out;
  std::string trace;
};

int run_decompose(const DecomposeOptions& o) {
  const rcp::TensorXd tensor = rcp::io::read_tensor(o.in);

  rcp::DecomposeConfig cfg;
  cfg.rank = o.rank;
  cfg.method = o.method == "bcd" ? rcp::SolveMethod::bcd : rcp::SolveMethod::als;
  cfg.randomized = !o.deterministic;
  cfg.tol = o.tol;
  cfg.max_iter = o.max_iter;
  cfg.seed = o.seed;
  cfg.compress.target_rank = o.rank;
  cfg.compress.oversampling = o.oversample;
  cfg.compress.power_iterations = o.power_iters;
  cfg.compress.seed =
      rcp::derive_seed(o.seed, rcp::stream_id(rcp::StreamDomain::compress));
  if (o.modes_given) {
    std::vector<Index> zero_based;
    for (Index m : o.modes) {
      if (m < 1 || m > tensor.order())
        throw std::invalid_argument("decompose: --modes entries are 1-based");
      zero_based.push_back(m - 1);
    }
    cfg.compress.modes = std::move(zero_based);
  }

  const auto start = std::chrono::steady_clock::now();
  const auto [model, trace] = rcp::decompose(tensor, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  rcp::io::write_kruskal(o.out, model);
  if (!o.trace.empty()) rcp::io::write_trace_csv(o.trace, trace);

  std::cout << "method=" << rcp::method_name(cfg.method)
            << " randomized=" << (cfg.randomized ? "true" : "false")
            << " rank=" << cfg.rank << " iters=" << trace.iterations
            << " seconds=" << std::setprecision(6) << seconds
            << " error=" << std::setprecision(12) << trace.final_relative_error
            << '\n';
  return trace.converged ? 0 : 2;
}

struct ReconstructOptions {
  std::string in;
  std::string out;
  std::string csv;
};

int run_reconstruct(const ReconstructOptions& o) {
  const rcp::KruskalXd model = rcp::io::read_kruskal(o.in);
  const rcp::TensorXd tensor = rcp::reconstruct(model);
  rcp::io::write_tensor(o.out, tensor);
  if (!o.csv.empty()) rcp::io::write_tensor_csv(o.csv, tensor);
  return 0;
}

struct BoundOptions {
  Shape shape;
  Index rank = 1;
  std::vector<Index> ks;
  Index oversample = 2;
  int trials = 100;
  std::uint64_t seed = 0;
  std::string out;
};

int run_bound(const BoundOptions& o) {
  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw std::runtime_error("bound: cannot open " + o.out);
  }
  std::ostream& os = o.out.empty() ? std::cout : file;
  os << std::setprecision(12)
     << "shape,rank,k,p,q,trials,seed,bound,mean_residual,holds\n";
  for (Index k : o.ks) {
    const rcp::BoundReport r =
        rcp::validate_bound(o.shape, o.rank, k, o.oversample, o.trials, o.seed);
    os << rcp::shape_string(o.shape) << ',' << o.rank << ',' << k << ',' << r.p
       << ",0," << r.trials << ',' << o.seed << ',' << r.bound << ','
       << r.empirical_mean << ','
       << (r.empirical_mean <= r.bound ? "true" : "false") << '\n';
  }
  return 0;
}

struct BenchOptions {
  Shape shape;
  std::vector<Index> ranks;
  std::vector<std::string> methods = {"als"};
  Index oversample = 10;
  Index power_iters = 2;
  double tol = 1e-5;
  int max_iter = 500;
  std::uint64_t seed = 0;
  int repeat = 1;
  bool parallel = false;
  std::string out;
};

int run_bench(const BenchOptions& o) {
  std::vector<rcp::BenchConfig> configs;
  for (const std::string& method : o.methods) {
    for (Index rank : o.ranks) {
      rcp::BenchConfig bc;
      bc.shape = o.shape;
      bc.rank = rank;
      bc.method = method == "bcd" ? rcp::SolveMethod::bcd : rcp::SolveMethod::als;
      bc.oversampling = o.oversample;
      bc.power_iterations = static_cast<int>(o.power_iters);
      bc.tol = o.tol;
      bc.max_iter = o.max_iter;
      bc.seed = o.seed;
      configs.push_back(bc);
    }
  }
  rcp::BenchOptions opts;
  opts.repeat = o.repeat;
  opts.parallel = o.parallel;
  const auto records = rcp::bench_sweep(configs, opts);

  std::ofstream file;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::trunc);
    if (!file) throw std::runtime_error("bench: cannot open " + o.out);
  }
  rcp::write_bench_csv(o.out.empty() ? std::cout : file, records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized CP tensor decomposition toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  SynthOptions so;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic low-rank tensor or the toy video");
  synth->add_option("--shape", so.shape, "Comma-separated extents")
      ->delimiter(',');
  auto* synth_rank = synth->add_option("--rank", so.rank, "Ground-truth rank");
  auto* synth_snr =
      synth->add_option("--snr", so.snr, "Add white noise at this ratio");
  auto* synth_toy = synth->add_flag("--toy-video", so.toy,
                                    "Separable oscillating-bump video (rank 4)");
  synth->add_option("--seed", so.seed, "RNG seed");
  synth->add_option("--out", so.out, "Output tensor file")->required();
  synth->add_option("--truth", so.truth, "Also write the ground-truth model");
  synth->add_option("--csv-export", so.csv, "Also dump flattened values as CSV");
  synth_rank->excludes(synth_toy);
  synth_toy->excludes(synth_rank);
  synth->callback([&] {
    so.noisy = synth_snr->count() > 0;
    exit_code = run_synth(so);
  });

  DecomposeOptions dopt;
  CLI::App* dec =
      app.add_subcommand("decompose", "Fit a CP model to a tensor file");
  dec->add_option("--in", dopt.in, "Input tensor file")->required();
  dec->add_option("--rank", dopt.rank, "CP rank")->required();
  dec->add_option("--method", dopt.method, "Solver")
      ->check(CLI::IsMember({"als", "bcd"}));
  auto* det = dec->add_flag("--deterministic", dopt.deterministic,
                            "Skip the randomized compression step");
  auto* overs = dec->add_option("--oversample", dopt.oversample,
                                "Extra sketch columns beyond the rank");
  auto* pits = dec->add_option("--power-iters", dopt.power_iters,
                               "Normalized power iterations per mode");
  auto* modes = dec->add_option("--modes", dopt.modes,
                                "1-based modes to compress (default: all)")
                    ->delimiter(',');
  det->excludes(overs)->excludes(pits)->excludes(modes);
  dec->add_option("--tol", dopt.tol, "Stop when the fit change drops below this");
  dec->add_option("--max-iter", dopt.max_iter, "Iteration budget");
  dec->add_option("--seed", dopt.seed, "RNG seed");
  dec->add_option("--out", dopt.out, "Output model file")->required();
  dec->add_option("--trace", dopt.trace, "Per-iteration fit CSV");
  dec->callback([&] {
    dopt.modes_given = modes->count() > 0;
    exit_code = run_decompose(dopt);
  });

  ReconstructOptions ro;
  CLI::App* rec =
      app.add_subcommand("reconstruct", "Expand a model file to a dense tensor");
  rec->add_option("--in", ro.in, "Input model file")->required();
  rec->add_option("--out", ro.out, "Output tensor file")->required();
  rec->add_option("--csv-export", ro.csv, "Also dump flattened values as CSV");
  rec->callback([&] { exit_code = run_reconstruct(ro); });

  BoundOptions bo;
  CLI::App* bound = app.add_subcommand(
      "bound", "Validate the expected-error bound on random low-rank tensors");
  bound->add_option("--shape", bo.shape, "Comma-separated extents")
      ->delimiter(',')
      ->required();
  bound->add_option("--rank", bo.rank, "Ground-truth rank")->required();
  bound->add_option("--k", bo.ks, "Sketch target ranks to test")
      ->delimiter(',')
      ->required();
  bound->add_option("--oversample", bo.oversample, "Oversampling parameter");
  bound->add_option("--trials", bo.trials, "Independent sketches per k");
  bound->add_option("--seed", bo.seed, "RNG seed");
  bound->add_option("--out", bo.out, "CSV path (default: stdout)");
  bound->callback([&] { exit_code = run_bound(bo); });

  BenchOptions eo;
  CLI::App* bench = app.add_subcommand(
      "bench", "Timed randomized-vs-deterministic comparison sweep");
  bench->add_option("--shape", eo.shape, "Comma-separated extents")
      ->delimiter(',')
      ->required();
  bench->add_option("--ranks", eo.ranks, "CP ranks to sweep")
      ->delimiter(',')
      ->required();
  bench->add_option("--methods", eo.methods, "Solvers to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({"als", "bcd"}));
  bench->add_option("--oversample", eo.oversample, "Sketch oversampling");
  bench->add_option("--power-iters", eo.power_iters, "Power iterations");
  bench->add_option("--tol", eo.tol, "Solver stopping threshold");
  bench->add_option("--max-iter", eo.max_iter, "Solver iteration budget");
  bench->add_option("--seed", eo.seed, "Data and sketch seed");
  bench->add_option("--repeat", eo.repeat, "Timing repetitions (median)");
  bench->add_flag("--parallel", eo.parallel,
                  "Run pairs concurrently (timings become unreliable)");
  bench->add_option("--out", eo.out, "CSV path (default: stdout)");
  bench->callback([&] { exit_code = run_bench(eo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
