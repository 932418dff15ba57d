#ifndef GMS_EXPERIMENTS_HPP
#define GMS_EXPERIMENTS_HPP

#include "gms/separation.hpp"
#include "gms/synth.hpp"

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace gms {

// ---------------------------------------------------------------------------
// Experiment records
// ---------------------------------------------------------------------------

struct ExperimentGrid {
  std::vector<double> rank_ratios;
  std::vector<double> sparsity_ratios;
  int trials = 10;
  double success_eps = 1e-3;
  std::uint64_t base_seed = 0;
  Index m = 100, n = 100, p = 100;

  void validate() const {
    if (trials < 1) throw InvalidParameterError("ExperimentGrid: trials < 1");
    for (double r : rank_ratios)
      if (!(r > 0 && r < 1)) throw InvalidParameterError("ExperimentGrid: rank ratio not in (0,1)");
    for (double s : sparsity_ratios)
      if (!(s > 0 && s < 1))
        throw InvalidParameterError("ExperimentGrid: sparsity ratio not in (0,1)");
  }
};

struct TrialRecord {
  int r_index = 0, s_index = 0, trial = 0;
  double rank_ratio = 0, sparsity_ratio = 0;
  std::uint64_t seed = 0;
  double relerr_s = 0, relerr_l = 0;
  int iters = 0;
  bool success = false;
};

struct ConvergenceRun {
  std::string algo;  // "gms" or "pgms"
  std::uint64_t seed = 0;
  double rho_outer = 0, rho_inner = 0;
  double relerr_s = 0, relerr_l = 0;
  int iters = 0;
  ConvergenceTrace trace;
};

struct ConvergenceReport {
  std::string scenario;
  std::vector<ConvergenceRun> runs;
};

// ---------------------------------------------------------------------------
// Single synthetic trial
// ---------------------------------------------------------------------------

struct TrialOutcome {
  double relerr_s = 0, relerr_l = 0;
  int iters = 0;
  Termination terminated_by = Termination::MaxIters;
  ConvergenceTrace trace;
};

inline TrialOutcome run_matrix_trial(bool precondition, const FilterSpec& H, Index m, Index n,
                                     Index p, double rank_ratio, const SparseModel& model,
                                     const SolverConfig& cfg, std::uint64_t seed,
                                     bool keep_trace = false) {
  Matrix L0 = gen_low_rank(m, n, rank_ratio, mix_seed(seed, 1));
  Matrix S0 = gen_sparse(p, n, model, mix_seed(seed, 2), &L0);
  Matrix M0 = L0 + H.apply(S0);
  MatrixTruth truth{L0, S0};
  SeparationResult res = precondition ? pgms(M0, H, cfg, truth) : gms(M0, H, cfg, truth);
  TrialOutcome out;
  out.relerr_s = rel_err(S0, res.S_hat);
  out.relerr_l = rel_err(L0, res.L_hat);
  out.iters = int(res.trace.size());
  out.terminated_by = res.terminated_by;
  if (keep_trace) out.trace = std::move(res.trace);
  return out;
}

// ---------------------------------------------------------------------------
// Convergence scenarios
// ---------------------------------------------------------------------------

inline ConvergenceReport run_convergence_experiment(const std::string& scenario,
                                                    std::uint64_t seed, int trials = 1,
                                                    bool keep_traces = true) {
  ConvergenceReport report;
  report.scenario = scenario;

  auto push_pair = [&](const FilterSpec& H, Index m, Index n, Index p, double rr,
                       const SparseModel& sm, const SolverConfig& cfg, std::uint64_t s) {
    for (bool pre : {false, true}) {
      TrialOutcome o = run_matrix_trial(pre, H, m, n, p, rr, sm, cfg, s, keep_traces);
      ConvergenceRun run;
      run.algo = pre ? "pgms" : "gms";
      run.seed = s;
      run.rho_outer = cfg.rho_outer;
      run.rho_inner = cfg.rho_inner;
      run.relerr_s = o.relerr_s;
      run.relerr_l = o.relerr_l;
      run.iters = o.iters;
      run.trace = std::move(o.trace);
      report.runs.push_back(std::move(run));
    }
  };

  if (scenario == "table2") {
    const Index n = 300, m = 270, p = 266;
    SolverConfig cfg;
    cfg.rho_outer = cfg.rho_inner = 1.0;
    cfg.tol_outer = 1e-7;
    cfg.tol_inner = 1e-5;
    cfg.max_outer = 500;
    cfg.max_inner = 30;
    for (int t = 0; t < trials; ++t) {
      std::uint64_t s = mix_seed(seed, 100, std::uint64_t(t));
      FilterSpec H = gen_gaussian_filter(m, p, mix_seed(s, 3));
      push_pair(H, m, n, p, 0.05, SparseModel::gaussian(0.05), cfg, s);
    }
  } else if (scenario == "table3") {
    const Index n = 300, m = 299, p = 299;
    SolverConfig cfg;
    cfg.rho_outer = cfg.rho_inner = 1.0;
    cfg.tol_outer = 1e-7;
    cfg.tol_inner = 1e-5;
    cfg.max_outer = 500;
    cfg.max_inner = 30;
    FilterSpec H = gen_circulant_diff(m);
    for (int t = 0; t < trials; ++t) {
      std::uint64_t s = mix_seed(seed, 200, std::uint64_t(t));
      push_pair(H, m, n, p, 0.05, SparseModel::gaussian(0.05), cfg, s);
    }
  } else if (scenario == "fig1") {
    const Index n = 100, m = 100, p = 100;
    SolverConfig cfg;
    cfg.rho_outer = cfg.rho_inner = 1.0;
    cfg.max_outer = 60;
    cfg.max_inner = 60;
    // tolerances far below reach so both algorithms run the full budget
    cfg.tol_outer = 1e-14;
    cfg.tol_inner = 1e-12;
    for (int t = 0; t < trials; ++t) {
      std::uint64_t s = mix_seed(seed, 300, std::uint64_t(t));
      FilterSpec H = gen_gaussian_filter(m, p, mix_seed(s, 3));
      push_pair(H, m, n, p, 0.05, SparseModel::gaussian(0.10), cfg, s);
    }
  } else if (scenario == "rho_sweep") {
    const Index n = 100, m = 99, p = 99;
    const std::vector<double> rho_o = {0.01, 0.05, 0.1, 1, 5, 10, 50, 100, 500};
    const std::vector<double> rho_i = {0.05, 0.1, 1, 5, 10, 50, 100};
    FilterSpec H = gen_circulant_diff(m);
    std::uint64_t s = mix_seed(seed, 400);
    SolverConfig base;
    base.tol_outer = 1e-7;
    base.tol_inner = 1e-5;
    base.max_outer = 100;
    base.max_inner = 20;
    std::vector<ConvergenceRun> runs(rho_o.size() * rho_i.size() * 2);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
    for (int a = 0; a < int(rho_o.size()); ++a) {
      for (int b = 0; b < int(rho_i.size()); ++b) {
        for (int pre = 0; pre < 2; ++pre) {
          SolverConfig cfg = base;
          cfg.rho_outer = rho_o[std::size_t(a)];
          cfg.rho_inner = rho_i[std::size_t(b)];
          TrialOutcome o = run_matrix_trial(pre == 1, H, m, n, p, 0.05,
                                            SparseModel::gaussian(0.05), cfg, s, false);
          ConvergenceRun run;
          run.algo = pre ? "pgms" : "gms";
          run.seed = s;
          run.rho_outer = cfg.rho_outer;
          run.rho_inner = cfg.rho_inner;
          run.relerr_s = o.relerr_s;
          run.relerr_l = o.relerr_l;
          run.iters = o.iters;
          runs[std::size_t((a * int(rho_i.size()) + b) * 2 + pre)] = std::move(run);
        }
      }
    }
    report.runs = std::move(runs);
  } else {
    throw InvalidParameterError("unknown convergence scenario: " + scenario);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Phase diagram
// ---------------------------------------------------------------------------

inline std::vector<TrialRecord> run_phase_diagram(const ExperimentGrid& grid,
                                                  const FilterSpec& H,
                                                  SparseModel::Variant sparse_variant,
                                                  const SolverConfig& cfg) {
  grid.validate();
  cfg.validate();
  const int nr = int(grid.rank_ratios.size());
  const int ns = int(grid.sparsity_ratios.size());
  std::vector<TrialRecord> records(std::size_t(nr) * std::size_t(ns) *
                                   std::size_t(grid.trials));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
  for (int ri = 0; ri < nr; ++ri) {
    for (int si = 0; si < ns; ++si) {
      for (int t = 0; t < grid.trials; ++t) {
        std::uint64_t seed = mix_seed(grid.base_seed, std::uint64_t(ri) + 1,
                                      std::uint64_t(si) + 1, std::uint64_t(t) + 1);
        SparseModel model{sparse_variant, grid.sparsity_ratios[std::size_t(si)]};
        TrialOutcome o = run_matrix_trial(true, H, grid.m, grid.n, grid.p,
                                          grid.rank_ratios[std::size_t(ri)], model, cfg, seed);
        TrialRecord rec;
        rec.r_index = ri;
        rec.s_index = si;
        rec.trial = t;
        rec.rank_ratio = grid.rank_ratios[std::size_t(ri)];
        rec.sparsity_ratio = grid.sparsity_ratios[std::size_t(si)];
        rec.seed = seed;
        rec.relerr_s = o.relerr_s;
        rec.relerr_l = o.relerr_l;
        rec.iters = o.iters;
        rec.success = o.relerr_s < grid.success_eps && o.relerr_l < grid.success_eps;
        records[(std::size_t(ri) * std::size_t(ns) + std::size_t(si)) *
                    std::size_t(grid.trials) + std::size_t(t)] = rec;
      }
    }
  }
  return records;
}

// Success fraction per (rank, sparsity) cell, row index = rank ratio index.
inline Matrix success_fractions(const std::vector<TrialRecord>& records, int nr, int ns) {
  Matrix sums = Matrix::Zero(nr, ns), counts = Matrix::Zero(nr, ns);
  for (const auto& r : records) {
    sums(r.r_index, r.s_index) += r.success ? 1.0 : 0.0;
    counts(r.r_index, r.s_index) += 1.0;
  }
  return sums.array() / counts.array().max(1.0);
}

// ---------------------------------------------------------------------------
// CSV emission (17 significant digits so plots reproduce bit-for-bit)
// ---------------------------------------------------------------------------

inline std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trial_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "rank_ratio,sparsity_ratio,trial,seed,relerr_s,relerr_l,iters,success\n";
  for (const auto& r : records)
    os << csv_double(r.rank_ratio) << ',' << csv_double(r.sparsity_ratio) << ',' << r.trial
       << ',' << r.seed << ',' << csv_double(r.relerr_s) << ',' << csv_double(r.relerr_l)
       << ',' << r.iters << ',' << (r.success ? 1 : 0) << '\n';
}

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& report) {
  os << "scenario,algo,seed,rho_outer,rho_inner,relerr_s,relerr_l,iters\n";
  for (const auto& r : report.runs)
    os << report.scenario << ',' << r.algo << ',' << r.seed << ',' << csv_double(r.rho_outer)
       << ',' << csv_double(r.rho_inner) << ',' << csv_double(r.relerr_s) << ','
       << csv_double(r.relerr_l) << ',' << r.iters << '\n';
}

inline void write_trace_csv(std::ostream& os, const ConvergenceTrace& trace) {
  os << "iter,change_ratio,residual,relerr_s,relerr_l,inner_iters\n";
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const auto& row = trace.rows[k];
    os << k + 1 << ',' << csv_double(row.change_ratio) << ',' << csv_double(row.residual)
       << ',' << (row.relerr_s ? csv_double(*row.relerr_s) : "") << ','
       << (row.relerr_l ? csv_double(*row.relerr_l) : "") << ',' << row.inner_iters << '\n';
  }
}

}  // namespace gms

#endif  // GMS_EXPERIMENTS_HPP
