// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include "msc/dictionaries.hpp"
#include "msc/experiments.hpp"
#include "msc/generators.hpp"
#include "msc/io.hpp"
#include "msc/prox.hpp"
#include "msc/random.hpp"
#include "msc/solvers.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace msc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig configured(const std::string& test, const std::string& text) {
  ExperimentConfig c = ExperimentConfig::defaults(test);
  c.apply(KeyValueConfig::parse(text));
  return c;
}

// 1: fixed-support least squares against the dense Kronecker oracle.
Outcome criterion1() {
  constexpr double tol = 1e-8;
  constexpr double time_limit = 5.0;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(3, 8), atoms(3, 10), small(1, 3);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = dim(rng), m = dim(rng), d = atoms(rng);
    const Index r = std::min<Index>(small(rng), m), k = std::min<Index>({small(rng), n, d});
    auto [dict, norms] = normalize_columns(oracle::random_matrix(n, d, rng));
    const Matrix b = oracle::random_matrix(m, r, rng), y = oracle::random_matrix(n, m, rng);
    const auto s = oracle::random_support(d, r, k, rng);
    Support sup;
    sup.columns = s;
    const Matrix got = fixed_support_ls(y, dict, MixingOperator::dense(b), sup).values;
    const Matrix ref = oracle::kron_support_ls(y, dict.matrix(), b, s);
    worst = std::max(worst, (got - ref).norm() / std::max(ref.norm(), 1e-300));
  }
  const double secs = seconds_since(start);
  return {worst <= tol && secs < time_limit, fmt("worst rel err %.2e (tol %.0e), %.3f s", worst, tol, secs)};
}

// 2: prox of the max-of-column-l1 penalty against an independent oracle.
Outcome criterion2() {
  constexpr double gap_tol = 1e-6;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> rows(1, 8), cols(1, 5);
  std::uniform_real_distribution<double> frac(0.0, 1.2);
  double worst_gap = -std::numeric_limits<double>::infinity();
  int zero_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const Matrix x = oracle::random_matrix(rows(rng), cols(rng), rng);
    const double threshold = x.cwiseAbs().colwise().maxCoeff().sum();
    const double lambda = frac(rng) * threshold;
    const Matrix z = prox::prox_l11(x, lambda);
    const double gap = oracle::prox_l11_objective(z, x, lambda) -
                       oracle::prox_l11_objective(oracle::prox_l11(x, lambda), x, lambda);
    worst_gap = std::max(worst_gap, gap);
    if (z.isZero(0.0) != (lambda >= threshold)) ++zero_mismatch;
    // the boundary itself and just below it
    if (!prox::prox_l11(x, threshold).isZero(0.0)) ++zero_mismatch;
    if (prox::prox_l11(x, 0.999 * threshold).isZero(0.0)) ++zero_mismatch;
  }
  return {worst_gap <= gap_tol && zero_mismatch == 0,
          fmt("worst objective gap %.2e (tol %.0e), zero-pattern mismatches %d", worst_gap, gap_tol, zero_mismatch)};
}

// 3: closed-form regimes.
Outcome criterion3() {
  constexpr double iht_tol = 1e-8;
  int nonzero = 0;
  for (int t = 0; t < 20; ++t) {
    const MscInstance inst = make_msc_instance(MscFamily{}, 300 + t, 0);
    const MixingOperator mix = MixingOperator::dense(inst.b);
    const MscProblem p(inst.y, inst.dictionary, mix);
    const Matrix x0 = Matrix::Zero(p.atoms(), p.rank());
    if (!block_fista(p, Vector::Ones(p.rank()), 5, x0).raw_codes.isZero(0.0)) ++nonzero;
    if (!mixed_fista(p, 1.0, 5, x0).raw_codes.isZero(0.0)) ++nonzero;
  }
  double worst = 0.0;
  std::mt19937_64 rng(303);
  for (int t = 0; t < 20; ++t) {
    const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(20, 20, rng)).householderQ();
    const Dictionary d = normalize_columns(q).first;
    const Matrix b = oracle::random_matrix(15, 1, rng), y = oracle::random_matrix(20, 15, rng);
    const SolverReport rep = iht(y, d, MixingOperator::dense(b), 4, Matrix::Zero(20, 1));
    const Vector expected =
        prox::hard_threshold_k(Vector(d.matrix().transpose() * y * b.col(0) / b.squaredNorm()), 4);
    worst = std::max(worst, (rep.codes.values.col(0) - expected).norm() / expected.norm());
  }
  return {nonzero == 0 && worst <= iht_tol,
          fmt("alpha=1 nonzero outputs %d of 40, IHT worst rel err %.2e (tol %.0e)", nonzero, worst, iht_tol)};
}

// 4: exhaustive support search on tiny noiseless instances (Gaussian D).
Outcome criterion4() {
  constexpr double match_tol = 1e-8;  // relative to ||Y||^2
  constexpr double required = 0.9;
  int homp_ok = 0, fista_ok = 0, omp_ok = 0;
  const int total = 50;
  for (int t = 0; t < total; ++t) {
    const std::uint64_t seed = 400 + t;
    std::mt19937_64 rng(derive_seed({seed, 1}));
    const Dictionary d = normalize_columns(oracle::random_matrix(6, 8, rng)).first;
    const Matrix b = gen_mixing(5, 1, 1.0, derive_seed({seed, 2}));
    const SparseCodes x = gen_codes(8, 1, 2, derive_seed({seed, 3}));
    const Matrix y = d.matrix() * x.values * b.transpose();
    const double best = oracle::best_support_cost(y, d.matrix(), b, 2);
    const double slack = match_tol * y.squaredNorm();
    const MixingOperator mix = MixingOperator::dense(b);
    const MscProblem p(y, d, mix);
    const Matrix x0 = Matrix::Zero(8, 1);
    if (homp(p, 2, x0).final_cost <= best + slack) ++homp_ok;
    if (block_fista(p, Vector::Constant(1, 1e-3), 2, x0).final_cost <= best + slack) ++fista_ok;
    const OmpResult o = omp(Vector(y * b.col(0) / b.squaredNorm()), d, 2);
    if (residual_cost(y, d, Matrix(o.x), mix) <= best + slack) ++omp_ok;
  }
  const int need = static_cast<int>(std::ceil(required * total));
  return {homp_ok >= need && fista_ok >= need && omp_ok >= need,
          fmt("matches of %d: HOMP %d, Block-FISTA %d, OMP %d (need %d)", total, homp_ok, fista_ok, omp_ok, need)};
}

// 5: noise regimes at the default problem size.
Outcome criterion5() {
  constexpr double high_snr_floor = 90.0;
  constexpr double fista_over_iht = 10.0;
  constexpr double trick_drop = 20.0;
  constexpr double time_limit = 600.0;
  const ExperimentConfig c = configured(
      "noise_sweep", "n_instances = 20\nsnr_db = 60, 20, 0\nsolvers = trick_omp, homp, iht, block_fista, mixed_fista\n");
  const auto start = Clock::now();
  const ResultTable t = run_experiment(c, 1);
  const double secs = seconds_since(start);
  const double trick60 = t.mean_recovery("trick_omp", "snr=60"), trick0 = t.mean_recovery("trick_omp", "snr=0");
  const double homp60 = t.mean_recovery("homp", "snr=60"), fista60 = t.mean_recovery("block_fista", "snr=60");
  const double fista20 = t.mean_recovery("block_fista", "snr=20"), iht20 = t.mean_recovery("iht", "snr=20");
  const bool a = trick60 >= high_snr_floor && homp60 >= high_snr_floor && fista60 >= high_snr_floor;
  const bool b = fista20 >= iht20 + fista_over_iht;
  const bool cc = trick60 - trick0 >= trick_drop;
  return {a && b && cc && secs < time_limit,
          fmt("(a) 60dB TrickOMP %.1f HOMP %.1f Block-FISTA %.1f [%s]; (b) 20dB Block-FISTA %.1f IHT %.1f [%s]; "
              "(c) TrickOMP %.1f -> %.1f [%s]; %.0f s",
              trick60, homp60, fista60, a ? "ok" : "short", fista20, iht20, b ? "ok" : "short", trick60, trick0,
              cc ? "ok" : "short", secs)};
}

// 6: conditioning of the mixing matrix.
Outcome criterion6() {
  constexpr double trick_drop = 20.0;
  constexpr double fista_change = 10.0;
  const ExperimentConfig c =
      configured("cond_sweep", "n_instances = 20\ncond_b = 1, 1e5\nsolvers = trick_omp, block_fista\n");
  const ResultTable t = run_experiment(c, 1);
  const double t1 = t.mean_recovery("trick_omp", "cond=1"), t5 = t.mean_recovery("trick_omp", "cond=100000");
  const double f1 = t.mean_recovery("block_fista", "cond=1"), f5 = t.mean_recovery("block_fista", "cond=100000");
  return {t1 - t5 >= trick_drop && std::abs(f1 - f5) <= fista_change,
          fmt("TrickOMP %.1f -> %.1f, Block-FISTA %.1f -> %.1f", t1, t5, f1, f5)};
}

// 7: runtime ordering.
Outcome criterion7() {
  const ExperimentConfig c = configured(
      "noise_sweep", "n_instances = 10\nsnr_db = 20\nsolvers = trick_omp, block_fista, homp\n");
  const ResultTable t = run_experiment(c, 1);
  const double tr = t.mean_wall_time("trick_omp"), bf = t.mean_wall_time("block_fista"), ho = t.mean_wall_time("homp");
  return {tr < bf && bf < ho, fmt("mean seconds TrickOMP %.2e, Block-FISTA %.2e, HOMP %.2e", tr, bf, ho)};
}

// 8: HOMP never increases its cost.
Outcome criterion8() {
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    MscFamily fam;
    fam.snr_db = t % 2 == 0 ? 20.0 : 0.0;
    const MscInstance inst = make_msc_instance(fam, 800 + t, 0);
    const SolverReport rep =
        homp(inst.y, inst.dictionary, MixingOperator::dense(inst.b), fam.k, Matrix::Zero(fam.d, fam.r));
    for (std::size_t i = 1; i < rep.cost_trace.size(); ++i)
      if (rep.cost_trace[i] > rep.cost_trace[i - 1]) ++violations;
  }
  return {violations == 0, fmt("%d violations over 100 instances", violations)};
}

// 9: synthetic DLRA.
Outcome criterion9() {
  constexpr double recovery_floor = 40.0;
  const ExperimentConfig dmf = configured("dmf_synth", "n_instances = 20\nsolvers = ao_dlra, ipalm\n");
  const ResultTable a = run_experiment(dmf, 1);
  const double ao_rec = a.mean_recovery("ao_dlra"), ip_rec = a.mean_recovery("ipalm");
  const double ao_err = a.mean_rel_error("ao_dlra"), ip_err = a.mean_rel_error("ipalm");
  const ExperimentConfig dcpd = configured("dcpd_synth", "n_instances = 10\nsolvers = ao_dlra_lra_init, lra_sc\n");
  const ResultTable b = run_experiment(dcpd, 1);
  const double ao_lra = b.mean_recovery("ao_dlra_lra_init"), sc = b.mean_recovery("lra_sc");
  return {ao_rec >= recovery_floor && ao_err <= ip_err && ao_lra >= sc,
          fmt("dmf: AO-DLRA rec %.1f err %.3g, iPALM rec %.1f err %.3g; dcpd: AO-DLRA(LRA init) %.1f, LRA+SC %.1f",
              ao_rec, ao_err, ip_rec, ip_err, ao_lra, sc)};
}

// 10: missing-row completion.
Outcome criterion10() {
  constexpr double ratio = 0.5;
  const ExperimentConfig c =
      configured("completion", "k_grid = 10\nk = 10\nn_instances = 10\nn_inits = 2\nmissing_fraction = 0.12\n");
  const ResultTable t = run_experiment(c, 1);
  const double dmf = t.mean_rel_error("dmf"), omp = t.mean_rel_error("omp");
  return {dmf <= ratio * omp, fmt("missing-row rel err DMF %.4g, OMP %.4g (need ratio <= %.1f)", dmf, omp, ratio)};
}

// 11: byte-identical results for 1 and 4 worker threads.
Outcome criterion11() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"noise_sweep", "n_instances = 3\nsnr_db = 60, 0\n"},
      {"cond_sweep", "n_instances = 3\ncond_b = 1, 1e5\nsolvers = trick_omp, block_fista\n"},
      {"kd_sweep", "n_instances = 2\nk_grid = 2, 5\nd_grid = 50\nsolvers = homp, block_fista\n"},
      {"dmf_synth", "n_instances = 3\nl_max = 20\nipalm_iters = 100\n"},
      {"dcpd_synth", "n_instances = 3\nl_max = 20\nipalm_iters = 100\n"},
      {"completion", "k_grid = 10\nn_instances = 2\nn_inits = 2\nl_max = 10\npatch_h = 8\npatch_w = 8\nbands = 30\n"},
  };
  const fs::path root = fs::temp_directory_path() / "msc_acceptance_determinism";
  std::string differing;
  for (const auto& [test, text] : runs) {
    const ExperimentConfig c = configured(test, text + "seed = 11\n");
    std::string csv[2];
    for (int j = 0; j < 2; ++j) {
      const fs::path dir = root / (test + (j == 0 ? "_1" : "_4"));
      fs::remove_all(dir);
      run_and_write(c, dir.string(), j == 0 ? 1 : 4);
      std::ifstream in(dir / "results.csv", std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      csv[j] = ss.str();
    }
    if (csv[0] != csv[1] || csv[0].empty()) differing += " " + test;
  }
  fs::remove_all(root);
  return {differing.empty(), differing.empty() ? fmt("%zu runners identical", runs.size()) : "differs:" + differing};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10, criterion11};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  }
  return failures;
}
