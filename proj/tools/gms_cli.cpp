// Command-line front end: separation runs, synthetic data generation,
// phase-diagram and convergence experiments, and the video pipeline.
//
// Exit codes: 0 success, 2 usage error, 3 data/format error,
// 4 solver non-convergence under --strict.

#include "gms/experiments.hpp"
#include "gms/io.hpp"
#include "gms/separation.hpp"
#include "gms/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gms;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConverge = 4;

LassoBackend parse_backend(const std::string& name) {
  if (name == "auto") return LassoBackend::Auto;
  if (name == "dense-svd") return LassoBackend::DenseSvd;
  if (name == "cholesky") return LassoBackend::Cholesky;
  if (name == "circulant") return LassoBackend::Circulant;
  if (name == "separable") return LassoBackend::Separable;
  if (name == "block") return LassoBackend::Block;
  if (name == "block-circulant") return LassoBackend::BlockCirculant;
  throw InvalidParameterError("unknown backend: " + name);
}

double to_double(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    double v = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + val);
  }
}

long to_long(const std::string& key, const std::string& val) {
  try {
    std::size_t pos = 0;
    long v = std::stol(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: " + val);
  }
}

std::vector<double> to_double_list(const std::string& key, const std::string& val) {
  std::vector<double> out;
  std::stringstream ss(val);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}

// Pops the solver keys from the parsed config; leftover keys are checked by
// the caller so each subcommand can layer its own keys on top.
void apply_solver_keys(std::map<std::string, std::string>& kv, SolverConfig& cfg) {
  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (auto v = take("lambda")) cfg.lambda = to_double("lambda", *v);
  if (auto v = take("rho_outer")) cfg.rho_outer = to_double("rho_outer", *v);
  if (auto v = take("rho_inner")) cfg.rho_inner = to_double("rho_inner", *v);
  if (auto v = take("max_outer")) cfg.max_outer = int(to_long("max_outer", *v));
  if (auto v = take("max_inner")) cfg.max_inner = int(to_long("max_inner", *v));
  if (auto v = take("tol_outer")) cfg.tol_outer = to_double("tol_outer", *v);
  if (auto v = take("tol_inner")) cfg.tol_inner = to_double("tol_inner", *v);
  if (auto v = take("rank_rtol")) cfg.rank_rtol = to_double("rank_rtol", *v);
  if (auto v = take("backend")) cfg.backend = parse_backend(*v);
}

void reject_unknown_keys(const std::map<std::string, std::string>& kv) {
  if (!kv.empty()) throw ConfigError("unknown config key: " + kv.begin()->first);
}

std::map<std::string, std::string> load_config(const std::string& path) {
  if (path.empty()) return {};
  return parse_config_file(path);
}

int strict_exit(bool strict, Termination term) {
  if (strict && term == Termination::MaxIters) {
    std::cerr << "error: solver hit the iteration limit before reaching tolerance\n";
    return kExitNoConverge;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// separate
// ---------------------------------------------------------------------------

struct SeparateArgs {
  std::string input, outdir = ".", config_path;
  std::string precondition = "on";
  std::string backend = "auto";
  std::string filter_kind = "identity";
  std::string filter_path;
  long k1 = 0, k2 = 0;
  bool strict = false;
};

FilterSpec build_matrix_filter(const SeparateArgs& a, Index m) {
  if (a.filter_kind == "identity") return FilterSpec::dense(Matrix::Identity(m, m));
  if (a.filter_kind == "circulant-diff") return gen_circulant_diff(m);
  if (a.filter_kind == "dense" || a.filter_kind == "circulant") {
    if (a.filter_path.empty())
      throw InvalidParameterError("--filter " + a.filter_kind + " requires --filter-path");
    auto data = read_tensor_file(a.filter_path);
    if (!std::holds_alternative<Matrix>(data))
      throw DataError("filter file must hold an order-2 tensor: " + a.filter_path);
    Matrix H = std::get<Matrix>(std::move(data));
    if (a.filter_kind == "circulant") {
      if (H.cols() != 1) throw DataError("circulant filter file must be a single column");
      return FilterSpec::circulant(H.col(0));
    }
    return FilterSpec::dense(std::move(H));
  }
  throw InvalidParameterError("unsupported filter kind for matrix input: " + a.filter_kind);
}

FilterSpec build_tensor_filter(const SeparateArgs& a, Index m1, Index m2) {
  if (a.filter_kind == "identity")
    return FilterSpec::separable(Matrix::Identity(m1, m1), Matrix::Identity(m2, m2));
  if (a.filter_kind == "paper-blur") {
    if (m1 % 2 != 0 || m2 % 4 != 0)
      throw DataError("paper-blur needs frame rows divisible by 2 and cols by 4");
    return gen_paper_blur(m1 / 2, m2 / 4);
  }
  if (a.filter_kind == "separable") {
    if (a.filter_path.empty())
      throw InvalidParameterError("--filter separable requires --filter-path (G1 file; G2 at <path>.g2)");
    auto g1 = read_tensor_file(a.filter_path);
    auto g2 = read_tensor_file(a.filter_path + ".g2");
    if (!std::holds_alternative<Matrix>(g1) || !std::holds_alternative<Matrix>(g2))
      throw DataError("separable filter files must hold order-2 tensors");
    return FilterSpec::separable(std::get<Matrix>(std::move(g1)), std::get<Matrix>(std::move(g2)));
  }
  throw InvalidParameterError("unsupported filter kind for tensor input: " + a.filter_kind);
}

int cmd_separate(const SeparateArgs& a) {
  auto kv = load_config(a.config_path);
  SolverConfig cfg;
  apply_solver_keys(kv, cfg);
  reject_unknown_keys(kv);
  cfg.backend = parse_backend(a.backend);
  const bool precondition = a.precondition == "on";

  fs::create_directories(a.outdir);
  auto data = read_tensor_file(a.input);
  ConvergenceTrace trace;
  Termination term;

  if (std::holds_alternative<Matrix>(data)) {
    const Matrix& M0 = std::get<Matrix>(data);
    FilterSpec H = build_matrix_filter(a, M0.rows());
    SeparationResult res = precondition ? pgms(M0, H, cfg) : gms::gms(M0, H, cfg);
    write_tensor_file(fs::path(a.outdir) / "S_hat.gms", res.S_hat);
    write_tensor_file(fs::path(a.outdir) / "L_hat.gms", res.L_hat);
    trace = std::move(res.trace);
    term = res.terminated_by;
  } else {
    const Tensor3& M0 = std::get<Tensor3>(data);
    FilterSpec H = build_tensor_filter(a, M0.dim1(), M0.dim2());
    TensorSeparationResult res = precondition ? pgts(M0, H, cfg) : gts(M0, H, cfg);
    write_tensor_file(fs::path(a.outdir) / "S_hat.gms", res.S_hat);
    write_tensor_file(fs::path(a.outdir) / "L_hat.gms", res.L_hat);
    trace = std::move(res.trace);
    term = res.terminated_by;
  }

  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_text_file_atomic(fs::path(a.outdir) / "trace.csv", csv.str());
  return strict_exit(a.strict, term);
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  long m = 100, n = 100, p = 100;
  double rank_ratio = 0.05, sparsity_ratio = 0.05;
  std::string model = "gaussian";
  std::string filter_kind = "gaussian";
  std::uint64_t seed = 0;
  std::string outdir = ".";
};

int cmd_synth(const SynthArgs& a) {
  SparseModel model;
  if (a.model == "gaussian") model = SparseModel::gaussian(a.sparsity_ratio);
  else if (a.model == "uniform") model = SparseModel::uniform(a.sparsity_ratio);
  else if (a.model == "impulsive") model = SparseModel::impulsive(a.sparsity_ratio);
  else throw InvalidParameterError("unknown sparse model: " + a.model);

  FilterSpec H = [&]() -> FilterSpec {
    if (a.filter_kind == "gaussian") return gen_gaussian_filter(a.m, a.p, mix_seed(a.seed, 3));
    if (a.filter_kind == "circulant-diff") {
      if (a.m != a.p) throw InvalidParameterError("circulant-diff needs m == p");
      return gen_circulant_diff(a.m);
    }
    if (a.filter_kind == "identity") {
      if (a.m != a.p) throw InvalidParameterError("identity filter needs m == p");
      return FilterSpec::dense(Matrix::Identity(a.m, a.m));
    }
    throw InvalidParameterError("unknown filter kind: " + a.filter_kind);
  }();

  Matrix L0 = gen_low_rank(a.m, a.n, a.rank_ratio, mix_seed(a.seed, 1));
  Matrix S0 = gen_sparse(a.p, a.n, model, mix_seed(a.seed, 2), &L0);
  Matrix M0 = L0 + H.apply(S0);

  Index nnz = 0;
  for (Index j = 0; j < S0.cols(); ++j)
    for (Index i = 0; i < S0.rows(); ++i)
      if (S0(i, j) != 0.0) ++nnz;
  Index rank = Index(std::max<double>(1.0, std::floor(a.rank_ratio * double(std::min(a.m, a.n)))));

  fs::create_directories(a.outdir);
  fs::path out(a.outdir);
  write_tensor_file(out / "L0.gms", L0);
  write_tensor_file(out / "S0.gms", S0);
  write_tensor_file(out / "M0.gms", M0);
  write_tensor_file(out / "filter.gms", H.densify());

  std::ostringstream manifest;
  manifest << "seed = " << a.seed << "\n"
           << "m = " << a.m << "\n"
           << "n = " << a.n << "\n"
           << "p = " << a.p << "\n"
           << "rank_ratio = " << csv_double(a.rank_ratio) << "\n"
           << "sparsity_ratio = " << csv_double(a.sparsity_ratio) << "\n"
           << "rank = " << rank << "\n"
           << "nonzeros = " << nnz << "\n"
           << "model = " << a.model << "\n"
           << "filter = " << a.filter_kind << "\n";
  write_text_file_atomic(out / "manifest.txt", manifest.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// phase
// ---------------------------------------------------------------------------

struct PhaseArgs {
  std::string config_path, outdir = ".";
  std::uint64_t seed = 0;
};

int cmd_phase(const PhaseArgs& a) {
  if (a.config_path.empty()) throw InvalidParameterError("phase requires --config");
  auto kv = load_config(a.config_path);

  ExperimentGrid grid;
  grid.base_seed = a.seed;
  SparseModel::Variant variant = SparseModel::Variant::Gaussian;
  std::string filter_kind = "gaussian";
  auto take = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  if (auto v = take("rank_ratios")) grid.rank_ratios = to_double_list("rank_ratios", *v);
  if (auto v = take("sparsity_ratios"))
    grid.sparsity_ratios = to_double_list("sparsity_ratios", *v);
  if (auto v = take("trials")) grid.trials = int(to_long("trials", *v));
  if (auto v = take("success_eps")) grid.success_eps = to_double("success_eps", *v);
  if (auto v = take("seed")) grid.base_seed = std::uint64_t(to_long("seed", *v));
  if (auto v = take("m")) grid.m = Index(to_long("m", *v));
  if (auto v = take("n")) grid.n = Index(to_long("n", *v));
  if (auto v = take("p")) grid.p = Index(to_long("p", *v));
  if (auto v = take("model")) {
    if (*v == "gaussian") variant = SparseModel::Variant::Gaussian;
    else if (*v == "uniform") variant = SparseModel::Variant::Uniform;
    else if (*v == "impulsive") variant = SparseModel::Variant::Impulsive;
    else throw ConfigError("unknown model: " + *v);
  }
  if (auto v = take("filter")) filter_kind = *v;
  if (grid.rank_ratios.empty() || grid.sparsity_ratios.empty())
    throw ConfigError("phase config needs rank_ratios and sparsity_ratios");

  SolverConfig cfg;
  apply_solver_keys(kv, cfg);
  reject_unknown_keys(kv);

  FilterSpec H = [&]() -> FilterSpec {
    if (filter_kind == "gaussian")
      return gen_gaussian_filter(grid.m, grid.p, mix_seed(grid.base_seed, 3));
    if (filter_kind == "circulant-diff") {
      if (grid.m != grid.p) throw ConfigError("circulant-diff needs m == p");
      return gen_circulant_diff(grid.m);
    }
    if (filter_kind == "identity") {
      if (grid.m != grid.p) throw ConfigError("identity filter needs m == p");
      return FilterSpec::dense(Matrix::Identity(grid.m, grid.m));
    }
    throw ConfigError("unknown filter kind: " + filter_kind);
  }();

  auto records = run_phase_diagram(grid, H, variant, cfg);
  Matrix frac = success_fractions(records, int(grid.rank_ratios.size()),
                                  int(grid.sparsity_ratios.size()));

  fs::create_directories(a.outdir);
  fs::path out(a.outdir);
  std::ostringstream trials_csv;
  write_trial_csv(trials_csv, records);
  write_text_file_atomic(out / "trials.csv", trials_csv.str());

  std::ostringstream frac_csv;
  frac_csv << "rank_ratio";
  for (double s : grid.sparsity_ratios) frac_csv << ',' << csv_double(s);
  frac_csv << '\n';
  for (Index i = 0; i < frac.rows(); ++i) {
    frac_csv << csv_double(grid.rank_ratios[std::size_t(i)]);
    for (Index j = 0; j < frac.cols(); ++j) frac_csv << ',' << csv_double(frac(i, j));
    frac_csv << '\n';
  }
  write_text_file_atomic(out / "fractions.csv", frac_csv.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

struct ConvergenceArgs {
  std::string scenario, outdir = ".";
  std::uint64_t seed = 0;
  int trials = 1;
};

int cmd_convergence(const ConvergenceArgs& a) {
  auto report = run_convergence_experiment(a.scenario, a.seed, a.trials,
                                           a.scenario != "rho_sweep");
  fs::create_directories(a.outdir);
  fs::path out(a.outdir);
  std::ostringstream runs_csv;
  write_convergence_csv(runs_csv, report);
  write_text_file_atomic(out / "runs.csv", runs_csv.str());
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& run = report.runs[i];
    if (run.trace.rows.empty()) continue;
    std::ostringstream trace_csv;
    write_trace_csv(trace_csv, run.trace);
    write_text_file_atomic(out / ("trace_" + run.algo + "_" + std::to_string(i) + ".csv"),
                           trace_csv.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// video
// ---------------------------------------------------------------------------

struct VideoArgs {
  std::string frames_dir, outdir = ".", config_path;
  std::string blur = "none";  // none | paper
  bool strict = false;
};

int cmd_video(const VideoArgs& a) {
  std::vector<fs::path> frame_paths;
  if (!fs::is_directory(a.frames_dir)) throw IoError("not a directory: " + a.frames_dir);
  for (const auto& e : fs::directory_iterator(a.frames_dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") frame_paths.push_back(e.path());
  if (frame_paths.empty()) throw DataError("no .pgm frames in " + a.frames_dir);
  std::sort(frame_paths.begin(), frame_paths.end());

  std::vector<Matrix> frames;
  for (const auto& p : frame_paths) frames.push_back(read_pgm(p));
  const Index m1 = frames[0].rows(), m2 = frames[0].cols(), K = Index(frames.size());
  for (const auto& f : frames)
    if (f.rows() != m1 || f.cols() != m2) throw DataError("inconsistent frame sizes");

  // M = 1 - V
  Tensor3 M(m1, m2, K);
  for (Index k = 0; k < K; ++k) M.slice(k) = Matrix::Ones(m1, m2) - frames[std::size_t(k)];

  FilterSpec H = [&]() -> FilterSpec {
    if (a.blur == "none")
      return FilterSpec::separable(Matrix::Identity(m1, m1), Matrix::Identity(m2, m2));
    if (a.blur == "paper") {
      if (m1 % 2 != 0 || m2 % 4 != 0)
        throw DataError("paper blur needs frame rows divisible by 2 and cols by 4");
      return gen_paper_blur(m1 / 2, m2 / 4);
    }
    throw InvalidParameterError("unknown blur: " + a.blur);
  }();

  Tensor3 M0 = a.blur == "none" ? M : H.apply(M);

  SolverConfig cfg;
  cfg.rho_outer = cfg.rho_inner = 1.0;
  cfg.tol_outer = 1e-8;
  cfg.tol_inner = 1e-6;
  cfg.max_outer = 100;
  cfg.max_inner = 10;
  auto kv = load_config(a.config_path);
  apply_solver_keys(kv, cfg);
  reject_unknown_keys(kv);

  TensorSeparationResult res = pgts(M0, H, cfg);

  fs::create_directories(a.outdir);
  fs::path out(a.outdir);
  char name[32];
  for (Index k = 0; k < K; ++k) {
    std::snprintf(name, sizeof(name), "fg_%03ld.pgm", long(k));
    write_pgm(out / name, Matrix(Matrix::Ones(m1, m2) - res.S_hat.slice(k)));
    std::snprintf(name, sizeof(name), "bg_%03ld.pgm", long(k));
    write_pgm(out / name, Matrix(-res.L_hat.slice(k)));
  }
  write_tensor_file(out / "S_hat.gms", res.S_hat);
  write_tensor_file(out / "L_hat.gms", res.L_hat);
  std::ostringstream csv;
  write_trace_csv(csv, res.trace);
  write_text_file_atomic(out / "trace.csv", csv.str());
  return strict_exit(a.strict, res.terminated_by);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank plus filtered-sparse matrix separation toolkit"};
  app.require_subcommand(1);

  SeparateArgs sep;
  auto* c_sep = app.add_subcommand("separate", "Separate M0 into L_hat + H*S_hat");
  c_sep->add_option("--input", sep.input, "Input M0 tensor file")->required();
  c_sep->add_option("--outdir", sep.outdir, "Output directory");
  c_sep->add_option("--config", sep.config_path, "Solver config file");
  c_sep->add_option("--precondition", sep.precondition, "on|off (default on)")
      ->check(CLI::IsMember({"on", "off"}));
  c_sep->add_option("--backend", sep.backend, "LASSO backend")
      ->check(CLI::IsMember({"auto", "dense-svd", "cholesky", "circulant", "separable",
                             "block", "block-circulant"}));
  c_sep->add_option("--filter", sep.filter_kind,
                    "identity|circulant-diff|dense|circulant|separable|paper-blur");
  c_sep->add_option("--filter-path", sep.filter_path, "Filter tensor file");
  c_sep->add_flag("--strict", sep.strict, "Exit 4 on non-convergence");

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Generate a synthetic problem bundle");
  c_syn->add_option("--m", syn.m)->check(CLI::PositiveNumber);
  c_syn->add_option("--n", syn.n)->check(CLI::PositiveNumber);
  c_syn->add_option("--p", syn.p)->check(CLI::PositiveNumber);
  c_syn->add_option("--rank-ratio", syn.rank_ratio);
  c_syn->add_option("--sparsity-ratio", syn.sparsity_ratio);
  c_syn->add_option("--model", syn.model)->check(CLI::IsMember({"gaussian", "uniform", "impulsive"}));
  c_syn->add_option("--filter", syn.filter_kind)
      ->check(CLI::IsMember({"gaussian", "circulant-diff", "identity"}));
  c_syn->add_option("--seed", syn.seed);
  c_syn->add_option("--outdir", syn.outdir);

  PhaseArgs ph;
  auto* c_ph = app.add_subcommand("phase", "Run a phase-diagram sweep");
  c_ph->add_option("--config", ph.config_path, "Grid + solver config")->required();
  c_ph->add_option("--outdir", ph.outdir);
  c_ph->add_option("--seed", ph.seed);

  ConvergenceArgs cv;
  auto* c_cv = app.add_subcommand("convergence", "Run a named convergence scenario");
  c_cv->add_option("--scenario", cv.scenario, "fig1|table2|table3|rho_sweep")
      ->required()
      ->check(CLI::IsMember({"fig1", "table2", "table3", "rho_sweep"}));
  c_cv->add_option("--seed", cv.seed);
  c_cv->add_option("--trials", cv.trials)->check(CLI::PositiveNumber);
  c_cv->add_option("--outdir", cv.outdir);

  VideoArgs vid;
  auto* c_vid = app.add_subcommand("video", "Background removal (and deblurring) on PGM frames");
  c_vid->add_option("--frames-dir", vid.frames_dir, "Directory of P5 .pgm frames")->required();
  c_vid->add_option("--outdir", vid.outdir);
  c_vid->add_option("--config", vid.config_path, "Solver config overrides");
  c_vid->add_option("--blur", vid.blur, "none|paper")->check(CLI::IsMember({"none", "paper"}));
  c_vid->add_flag("--strict", vid.strict, "Exit 4 on non-convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_sep) return cmd_separate(sep);
    if (*c_syn) return cmd_synth(syn);
    if (*c_ph) return cmd_phase(ph);
    if (*c_cv) return cmd_convergence(cv);
    if (*c_vid) return cmd_video(vid);
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {  // Io/Data/Shape/solver errors
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
