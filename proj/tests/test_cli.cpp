#include "gms/io.hpp"
#include "gms/synth.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gms;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("GMS_CLI");
  REQUIRE(p != nullptr);
  return p;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gms_cli_test_" + std::to_string(std::uintptr_t(this)));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// runs the CLI, returns its exit code; stderr captured to err_file
int run_cli(const std::string& args, const fs::path& err_file) {
  std::string cmd = cli_path() + " " + args + " 2>" + err_file.string();
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli rejects missing subcommand and unknown flags with exit 2") {
  TempDir dir;
  CHECK(run_cli("", dir.path / "e1") == 2);
  CHECK(run_cli("separate --no-such-flag", dir.path / "e2") == 2);
  CHECK(run_cli("convergence --scenario bogus", dir.path / "e3") == 2);
}

TEST_CASE("separate on a zero matrix yields zero outputs and exit 0") {
  TempDir dir;
  write_tensor_file(dir.path / "M0.gms", Matrix(Matrix::Zero(8, 6)));
  int rc = run_cli("separate --input " + (dir.path / "M0.gms").string() + " --outdir " +
                       (dir.path / "out").string(),
                   dir.path / "err");
  REQUIRE(rc == 0);
  auto S = read_tensor_file(dir.path / "out" / "S_hat.gms");
  auto L = read_tensor_file(dir.path / "out" / "L_hat.gms");
  CHECK(std::get<Matrix>(S).isZero(0.0));
  CHECK(std::get<Matrix>(L).isZero(0.0));
}

TEST_CASE("synth then separate round-trips the bundled ground truth") {
  TempDir dir;
  fs::path bundle = dir.path / "bundle", out = dir.path / "out";
  REQUIRE(run_cli("synth --m 40 --n 45 --p 38 --seed 7 --outdir " + bundle.string(),
                  dir.path / "e1") == 0);

  // determinism: second run produces byte-identical files
  fs::path bundle2 = dir.path / "bundle2";
  REQUIRE(run_cli("synth --m 40 --n 45 --p 38 --seed 7 --outdir " + bundle2.string(),
                  dir.path / "e2") == 0);
  CHECK(slurp(bundle / "M0.gms") == slurp(bundle2 / "M0.gms"));
  CHECK(slurp(bundle / "manifest.txt") == slurp(bundle2 / "manifest.txt"));

  std::ofstream(dir.path / "solver.cfg") << "max_outer = 300\ntol_outer = 1e-9\ntol_inner = 1e-7\n";
  REQUIRE(run_cli("separate --input " + (bundle / "M0.gms").string() +
                      " --filter dense --filter-path " + (bundle / "filter.gms").string() +
                      " --config " + (dir.path / "solver.cfg").string() + " --outdir " +
                      out.string(),
                  dir.path / "e3") == 0);

  Matrix S0 = std::get<Matrix>(read_tensor_file(bundle / "S0.gms"));
  Matrix L0 = std::get<Matrix>(read_tensor_file(bundle / "L0.gms"));
  Matrix S_hat = std::get<Matrix>(read_tensor_file(out / "S_hat.gms"));
  Matrix L_hat = std::get<Matrix>(read_tensor_file(out / "L_hat.gms"));
  CHECK(rel_err(S0, S_hat) <= 1e-4);
  CHECK(rel_err(L0, L_hat) <= 1e-4);

  std::string trace = slurp(out / "trace.csv");
  CHECK(trace.rfind("iter,", 0) == 0);
}

TEST_CASE("malformed magic bytes produce a bad-magic diagnostic and exit 3") {
  TempDir dir;
  std::ofstream(dir.path / "bad.gms", std::ios::binary) << "NOPEgarbagegarbage";
  int rc = run_cli("separate --input " + (dir.path / "bad.gms").string() + " --outdir " +
                       (dir.path / "out").string(),
                   dir.path / "err");
  CHECK(rc == 3);
  CHECK(slurp(dir.path / "err").find("magic") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  TempDir dir;
  write_tensor_file(dir.path / "M0.gms", Matrix(Matrix::Zero(4, 4)));
  std::ofstream(dir.path / "bad.cfg") << "max_outer = 5\nnot_a_key = 1\n";
  int rc = run_cli("separate --input " + (dir.path / "M0.gms").string() + " --config " +
                       (dir.path / "bad.cfg").string() + " --outdir " + (dir.path / "o").string(),
                   dir.path / "err");
  CHECK(rc == 2);
  CHECK(slurp(dir.path / "err").find("not_a_key") != std::string::npos);
}

TEST_CASE("strict mode flags non-convergence with exit 4") {
  TempDir dir;
  Matrix L0 = gen_low_rank(20, 20, 0.1, 41);
  Matrix S0 = gen_sparse(20, 20, SparseModel::gaussian(0.1), 42, &L0);
  write_tensor_file(dir.path / "M0.gms", Matrix(L0 + S0));
  std::ofstream(dir.path / "tight.cfg") << "max_outer = 2\ntol_outer = 1e-14\n";
  int rc = run_cli("separate --input " + (dir.path / "M0.gms").string() + " --config " +
                       (dir.path / "tight.cfg").string() + " --strict --outdir " +
                       (dir.path / "o").string(),
                   dir.path / "err");
  CHECK(rc == 4);
}

TEST_CASE("phase subcommand writes per-trial and fraction CSVs") {
  TempDir dir;
  std::ofstream(dir.path / "grid.cfg") << "rank_ratios = 0.02,0.2\n"
                                          "sparsity_ratios = 0.02,0.2\n"
                                          "trials = 2\n"
                                          "m = 20\nn = 20\np = 20\n"
                                          "seed = 5\n"
                                          "max_outer = 40\nmax_inner = 10\n";
  REQUIRE(run_cli("phase --config " + (dir.path / "grid.cfg").string() + " --outdir " +
                      (dir.path / "out").string(),
                  dir.path / "err") == 0);
  std::string trials = slurp(dir.path / "out" / "trials.csv");
  // header + cells * trials rows
  CHECK(std::count(trials.begin(), trials.end(), '\n') == 1 + 2 * 2 * 2);
  std::string frac = slurp(dir.path / "out" / "fractions.csv");
  CHECK(std::count(frac.begin(), frac.end(), '\n') == 3);
}

TEST_CASE("video pipeline recovers a moving dot over a static background") {
  TempDir dir;
  const Index m1 = 16, m2 = 16, K = 6;
  SplitMix64 rng(91);
  Matrix bg(m1, m2);
  for (Index j = 0; j < m2; ++j)
    for (Index i = 0; i < m1; ++i) bg(i, j) = 0.3 + 0.4 * rng.uniform01();

  fs::path frames = dir.path / "frames";
  fs::create_directories(frames);
  std::vector<std::pair<Index, Index>> dots;
  for (Index k = 0; k < K; ++k) {
    Matrix f = bg;
    Index r = 3 + k, c = 4 + k;  // 2-pixel dot moving along the diagonal
    f(r, c) = 0.0;
    f(r + 1, c) = 0.0;
    dots.emplace_back(r, c);
    char name[32];
    std::snprintf(name, sizeof(name), "f_%03ld.pgm", long(k));
    write_pgm(frames / name, f);
  }

  REQUIRE(run_cli("video --frames-dir " + frames.string() + " --outdir " +
                      (dir.path / "out").string(),
                  dir.path / "err") == 0);

  for (Index k = 0; k < K; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "fg_%03ld.pgm", long(k));
    Matrix fg = read_pgm(dir.path / "out" / name);
    auto [r, c] = dots[std::size_t(k)];
    for (Index j = 0; j < m2; ++j)
      for (Index i = 0; i < m1; ++i) {
        bool on_dot = (j == c && (i == r || i == r + 1));
        if (!on_dot) CHECK(std::abs(fg(i, j) - 1.0) <= 1e-2);
      }
    CHECK(fg(r, c) < 0.8);  // dot visibly darker than the ~1.0 background
  }
}

TEST_CASE("video with identity blur matches the plain matrix RPCA path") {
  TempDir dir;
  const Index m1 = 8, m2 = 8, K = 4;
  SplitMix64 rng(92);
  fs::path frames = dir.path / "frames";
  fs::create_directories(frames);
  Matrix bg(m1, m2);
  for (Index j = 0; j < m2; ++j)
    for (Index i = 0; i < m1; ++i) bg(i, j) = 0.25 + 0.5 * rng.uniform01();
  for (Index k = 0; k < K; ++k) {
    Matrix f = bg;
    f(Index(k), Index(k)) = 0.0;
    char name[32];
    std::snprintf(name, sizeof(name), "f_%03ld.pgm", long(k));
    write_pgm(frames / name, f);
  }
  REQUIRE(run_cli("video --frames-dir " + frames.string() + " --outdir " +
                      (dir.path / "out").string(),
                  dir.path / "err") == 0);
  auto S = read_tensor_file(dir.path / "out" / "S_hat.gms");
  CHECK(std::holds_alternative<Tensor3>(S));
}

TEST_CASE("video rejects inconsistent frame sizes") {
  TempDir dir;
  fs::path frames = dir.path / "frames";
  fs::create_directories(frames);
  write_pgm(frames / "a.pgm", Matrix(Matrix::Constant(8, 8, 0.5)));
  write_pgm(frames / "b.pgm", Matrix(Matrix::Constant(8, 12, 0.5)));
  CHECK(run_cli("video --frames-dir " + frames.string() + " --outdir " +
                    (dir.path / "out").string(),
                dir.path / "err") == 3);
}
