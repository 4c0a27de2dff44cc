#include "msc/generators.hpp"
#include "msc/metrics.hpp"
#include "msc/solvers.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace msc;

namespace {

struct Instance {
  Matrix y;
  Dictionary d;
  Matrix b;
  SparseCodes truth;
};

// Gaussian (incoherent) dictionary, conditioned mixing, Gaussian codes.
Instance gaussian_instance(Index n, Index m, Index d, Index r, Index k, double cond, double snr_db,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.d = normalize_columns(oracle::random_matrix(n, d, rng)).first;
  inst.b = gen_mixing(m, r, cond, seed + 1);
  inst.truth = gen_codes(d, r, k, seed + 2);
  inst.y = add_noise_snr(inst.d.matrix() * inst.truth.values * inst.b.transpose(), snr_db, seed + 3);
  return inst;
}

double penalized(const MscProblem& p, const Matrix& x, const Vector& lambdas) {
  return 0.5 * p.cost(x) + (x.cwiseAbs().colwise().sum().transpose().array() * lambdas.array()).sum();
}

Index max_column_nnz(const Matrix& x) {
  Index best = 0;
  for (Index j = 0; j < x.cols(); ++j) best = std::max<Index>(best, (x.col(j).array().abs() > kSupportTolerance).count());
  return best;
}

}  // namespace

// ------------------------------------------------------------------ OMP

TEST(Omp, OrthogonalDictionary) {
  auto [d, norms] = normalize_columns(Matrix::Identity(3, 3));
  Vector y(3);
  y << 3, 1, 0;
  const OmpResult res = omp(y, d, 2);
  EXPECT_TRUE(res.x.isApprox(y));
  EXPECT_EQ(res.support, (std::vector<Index>{0, 1}));
}

TEST(Omp, ExactAtomSelectedFirst) {
  std::mt19937_64 rng(1);
  auto [d, norms] = normalize_columns(oracle::random_matrix(6, 9, rng));
  for (Index j = 0; j < 9; ++j) EXPECT_EQ(omp(d.matrix().col(j), d, 1).support, std::vector<Index>{j});
}

TEST(Omp, ResidualOrthogonalToSelectedAtoms) {
  std::mt19937_64 rng(2);
  auto [d, norms] = normalize_columns(oracle::random_matrix(10, 15, rng));
  const Vector y = oracle::random_matrix(10, 1, rng).col(0);
  const OmpResult res = omp(y, d, 4);
  EXPECT_EQ(res.support.size(), 4u);
  const Vector r = y - d.matrix() * res.x;
  for (Index j : res.support) EXPECT_LT(std::abs(d.matrix().col(j).dot(r)), 1e-10);
}

TEST(Omp, MatchesExhaustiveSearchOnNoiselessSignals) {
  int matched = 0;
  for (int t = 0; t < 50; ++t) {
    std::mt19937_64 rng(100 + t);
    auto [d, norms] = normalize_columns(oracle::random_matrix(6, 8, rng));
    const Vector x0 = gen_codes(8, 1, 2, 200 + t).values.col(0);
    const Vector y = d.matrix() * x0;
    const OmpResult res = omp(y, d, 2);
    const double best = oracle::best_support_cost(y, d.matrix(), Matrix::Ones(1, 1), 2);
    if ((y - d.matrix() * res.x).squaredNorm() <= best + 1e-10 * y.squaredNorm()) ++matched;
  }
  // greedy selection is not exact on every draw at this size (about 85%)
  EXPECT_GE(matched, 40);
}

TEST(Omp, RejectsInvalidK) {
  auto [d, norms] = normalize_columns(Matrix::Identity(3, 3));
  EXPECT_THROW(omp(Vector::Ones(3), d, 0), std::invalid_argument);
  EXPECT_THROW(omp(Vector::Ones(3), d, 4), std::invalid_argument);
}

// ------------------------------------------------------------------ TrickOMP

TEST(TrickOmp, IdentityMixingIsColumnwiseOmp) {
  std::mt19937_64 rng(3);
  auto [d, norms] = normalize_columns(oracle::random_matrix(8, 12, rng));
  const Matrix y = oracle::random_matrix(8, 4, rng);
  const SolverReport rep = trick_omp(y, d, MixingOperator::dense(Matrix::Identity(4, 4)), 3);
  for (Index j = 0; j < 4; ++j) EXPECT_EQ(rep.codes.support.columns[j], omp(y.col(j), d, 3).support);
  EXPECT_EQ(rep.iterations, 3);
}

TEST(TrickOmp, RecoversNoiselessWellConditioned) {
  for (int t = 0; t < 10; ++t) {
    const Instance inst = gaussian_instance(30, 20, 40, 3, 3, 2.0, std::numeric_limits<double>::infinity(), 10 * t);
    const SolverReport rep = trick_omp(inst.y, inst.d, MixingOperator::dense(inst.b), 3);
    EXPECT_DOUBLE_EQ(support_recovery(rep.codes.support, inst.truth.support), 100.0);
    EXPECT_LT((rep.codes.values - inst.truth.values).norm(), 1e-8 * inst.truth.values.norm());
  }
}

TEST(TrickOmp, RankDeficientMixingThrows) {
  std::mt19937_64 rng(4);
  auto [d, norms] = normalize_columns(oracle::random_matrix(6, 8, rng));
  Matrix b = oracle::random_matrix(5, 2, rng);
  b.col(1) = 2.0 * b.col(0);
  EXPECT_THROW(trick_omp(oracle::random_matrix(6, 5, rng), d, MixingOperator::dense(b), 2), NumericalError);
}

TEST(TrickOmp, IllConditionedMixingDegradesRecovery) {
  double well = 0.0, ill = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::uint64_t seed = 1000 + 17 * t;
    std::mt19937_64 rng(seed);
    auto [d, norms] = normalize_columns(gen_dictionary_raw(50, 100, seed));
    const SparseCodes x = gen_codes(100, 6, 5, seed + 2);
    for (double cond : {1.0, 1e5}) {
      const Matrix b = gen_mixing(50, 6, cond, seed + 1);
      const Matrix y = add_noise_snr(d.matrix() * x.values * b.transpose(), 20.0, seed + 3);
      const double rec = support_recovery(trick_omp(y, d, MixingOperator::dense(b), 5).codes.support, x.support);
      (cond == 1.0 ? well : ill) += rec / 20.0;
    }
  }
  EXPECT_LT(ill, well);
}

// ------------------------------------------------------------------ reduction bound

TEST(ReductionBound, OrthogonalDictionary) {
  std::mt19937_64 rng(5);
  const Matrix b = gen_mixing(6, 3, 4.0, 5);
  const double sb = Eigen::JacobiSVD<Matrix>(b).singularValues().minCoeff();
  EXPECT_NEAR(check_reduction_bound(Matrix::Identity(6, 6), b, 2, 0.3, 0.2), std::sqrt(0.3 + 0.2 / (sb * sb)), 1e-10);
  EXPECT_EQ(check_reduction_bound(Matrix::Identity(6, 6), b, 2, 0.0, 0.0), 0.0);
}

TEST(ReductionBound, MatchesPerSubmatrixSvd) {
  std::mt19937_64 rng(6);
  const Matrix d = oracle::unit_columns(oracle::random_matrix(5, 8, rng));
  const Matrix b = oracle::random_matrix(6, 2, rng);
  double smin = std::numeric_limits<double>::infinity();
  oracle::for_each_subset(8, 4, [&](const std::vector<Index>& s) {
    const Vector sv = Eigen::JacobiSVD<Matrix>(d(Eigen::all, s)).singularValues();
    for (Index i = sv.size() - 1; i >= 0; --i)
      if (sv(i) > 1e-12 * sv(0)) {
        smin = std::min(smin, sv(i));
        break;
      }
  });
  const double sb = Eigen::JacobiSVD<Matrix>(b).singularValues().minCoeff();
  EXPECT_NEAR(check_reduction_bound(d, b, 2, 0.1, 0.05) / (std::sqrt(0.1 + 0.05 / (sb * sb)) / smin), 1.0, 1e-9);
}

TEST(ReductionBound, EnumerationGuard) {
  std::mt19937_64 rng(7);
  EXPECT_THROW(check_reduction_bound(oracle::random_matrix(40, 60, rng), Matrix::Identity(3, 3), 10, 0.1, 0.1),
               std::invalid_argument);
}

// ------------------------------------------------------------------ IHT

TEST(Iht, ZeroDataStaysZero) {
  std::mt19937_64 rng(8);
  auto [d, norms] = normalize_columns(oracle::random_matrix(6, 8, rng));
  const SolverReport rep =
      iht(Matrix::Zero(6, 5), d, MixingOperator::dense(oracle::random_matrix(5, 2, rng)), 2, Matrix::Zero(8, 2));
  EXPECT_TRUE(rep.codes.values.isZero(0.0));
  EXPECT_LE(rep.iterations, 1);
}

TEST(Iht, OrthogonalDictionaryRankOneIsThresholdedProjection) {
  std::mt19937_64 rng(9);
  const Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(10, 10, rng)).householderQ();
  auto [d, norms] = normalize_columns(q);
  const Matrix b = oracle::random_matrix(7, 1, rng), y = oracle::random_matrix(10, 7, rng);
  const Vector target = prox::hard_threshold_k(d.matrix().transpose() * y * b.col(0) / b.squaredNorm(), 3);
  const SolverReport rep = iht(y, d, MixingOperator::dense(b), 3, Matrix::Zero(10, 1));
  EXPECT_LT((rep.codes.values.col(0) - target).norm(), 1e-8 * target.norm());
}

TEST(Iht, Deterministic) {
  const Instance inst = gaussian_instance(12, 10, 20, 3, 2, 10.0, 20.0, 11);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const SolverReport a = iht(inst.y, inst.d, mix, 2, Matrix::Zero(20, 3));
  const SolverReport b = iht(inst.y, inst.d, mix, 2, Matrix::Zero(20, 3));
  EXPECT_EQ(a.codes.values, b.codes.values);
  EXPECT_EQ(a.cost_trace, b.cost_trace);
  EXPECT_EQ(a.iterations, b.iterations);
}

// ------------------------------------------------------------------ HOMP

TEST(Homp, RankOneIsOmpOnProjectedData) {
  std::mt19937_64 rng(12);
  auto [d, norms] = normalize_columns(oracle::random_matrix(9, 14, rng));
  const Matrix b = oracle::random_matrix(6, 1, rng), y = oracle::random_matrix(9, 6, rng);
  const SolverReport rep = homp(y, d, MixingOperator::dense(b), 3, Matrix::Zero(14, 1));
  EXPECT_EQ(rep.codes.support.columns[0], omp(y * b.col(0) / b.squaredNorm(), d, 3).support);
}

TEST(Homp, CostTraceNonincreasing) {
  for (int t = 0; t < 30; ++t) {
    const Instance inst = gaussian_instance(15, 12, 25, 4, 3, 50.0, 10.0, 300 + t);
    const SolverReport rep = homp(inst.y, inst.d, MixingOperator::dense(inst.b), 3, Matrix::Zero(25, 4));
    for (std::size_t i = 1; i < rep.cost_trace.size(); ++i) EXPECT_LE(rep.cost_trace[i], rep.cost_trace[i - 1]);
  }
}

TEST(Homp, CloseToExhaustiveSupportPairs) {
  int passed = 0;
  for (int t = 0; t < 50; ++t) {
    const Instance inst = gaussian_instance(6, 5, 8, 2, 1, 3.0, 20.0, 500 + 7 * t);
    const SolverReport rep = homp(inst.y, inst.d, MixingOperator::dense(inst.b), 1, Matrix::Zero(8, 2));
    const double best = oracle::best_support_cost(inst.y, inst.d.matrix(), inst.b, 1);
    if (rep.final_cost <= 1.05 * best) ++passed;
  }
  EXPECT_GE(passed, 40);
}

// ------------------------------------------------------------------ lambda max and convex solvers

TEST(LambdaMax, DirectFormula) {
  Matrix y(2, 2);
  y << 1, 2, 3, 4;
  auto [d, norms] = normalize_columns(Matrix::Identity(2, 2));
  const MixingOperator mix = MixingOperator::dense(Matrix::Identity(2, 2));
  const Vector block = lambda_max_block(y, d, mix);
  EXPECT_DOUBLE_EQ(block(0), 3.0);
  EXPECT_DOUBLE_EQ(block(1), 4.0);
  EXPECT_DOUBLE_EQ(lambda_max_mixed(y, d, mix), 7.0);
  EXPECT_TRUE(lambda_max_block(Matrix::Zero(2, 2), d, mix).isZero(0.0));
}

TEST(BlockFista, MaximumRegularizationGivesZero) {
  for (int t = 0; t < 5; ++t) {
    const Instance inst = gaussian_instance(10, 8, 15, 3, 2, 10.0, 10.0, 600 + t);
    const SolverReport rep =
        block_fista(inst.y, inst.d, MixingOperator::dense(inst.b), Vector::Ones(3), 2, Matrix::Zero(15, 3));
    EXPECT_TRUE(rep.raw_codes.isZero(0.0));
    EXPECT_EQ(rep.codes.support.total_size(), 0u);
  }
}

TEST(BlockFista, AlphaOutOfRangeThrows) {
  const Instance inst = gaussian_instance(6, 5, 8, 2, 1, 2.0, 20.0, 601);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  EXPECT_THROW(block_fista(inst.y, inst.d, mix, Vector::Constant(2, 1.5), 1, Matrix::Zero(8, 2)), std::invalid_argument);
  EXPECT_THROW(mixed_fista(inst.y, inst.d, mix, -0.1, 1, Matrix::Zero(8, 2)), std::invalid_argument);
}

TEST(BlockFista, MatchesCoordinateDescentLasso) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5; ++t) {
    auto [d, norms] = normalize_columns(oracle::random_matrix(20, 30, rng));
    const Matrix y = oracle::random_matrix(20, 1, rng);
    const MixingOperator mix = MixingOperator::dense(Matrix::Identity(1, 1));
    const MscProblem p(y, d, mix);
    const double alpha = 0.1;
    const double lambda = alpha * lambda_max_block(p)(0);
    FistaOptions opts;
    opts.stop.rel_tol = 1e-16;
    opts.stop.max_iter = 200000;
    const SolverReport rep = block_fista(p, Vector::Constant(1, alpha), 5, Matrix::Zero(30, 1), opts);
    const Vector cd = oracle::lasso_cd(d.matrix(), y.col(0), lambda);
    EXPECT_LE(oracle::lasso_objective(d.matrix(), y.col(0), rep.raw_codes.col(0), lambda),
              oracle::lasso_objective(d.matrix(), y.col(0), cd, lambda) + 1e-8);
  }
}

TEST(BlockFista, NoiselessIncoherentRecovery) {
  // Coefficients far below the shrinkage level (|x| < 1e-2) are out of reach
  // for any l1 method; every other true atom must be found.
  double total = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Instance inst = gaussian_instance(50, 50, 100, 6, 5, 1.0, std::numeric_limits<double>::infinity(), 700 + t);
    const SolverReport rep = block_fista(inst.y, inst.d, MixingOperator::dense(inst.b), Vector::Constant(6, 1e-3), 5,
                                         Matrix::Zero(100, 6));
    total += support_recovery(rep.codes.support, inst.truth.support) / 10.0;
    for (std::size_t c = 0; c < 6; ++c)
      for (Index j : inst.truth.support.columns[c])
        if (std::abs(inst.truth.values(j, static_cast<Index>(c))) >= 1e-2) EXPECT_TRUE(rep.codes.support.contains(c, j));
  }
  EXPECT_GE(total, 95.0);
}

TEST(BlockFista, PenalizedObjectiveDecreasesFromInit) {
  for (int t = 0; t < 10; ++t) {
    const Instance inst = gaussian_instance(12, 10, 20, 3, 3, 20.0, 15.0, 800 + t);
    const MixingOperator mix = MixingOperator::dense(inst.b);
    const MscProblem p(inst.y, inst.d, mix);
    std::mt19937_64 rng(t);
    const Matrix x0 = oracle::random_matrix(20, 3, rng);
    const Vector alpha = Vector::Constant(3, 0.05);
    const Vector lambdas = alpha.cwiseProduct(lambda_max_block(p));
    const SolverReport rep = block_fista(p, alpha, 3, x0);
    EXPECT_LE(penalized(p, rep.raw_codes, lambdas), penalized(p, x0, lambdas));
    EXPECT_LE(rep.cost_trace.back(), rep.cost_trace.front());
    const SolverReport mixed = mixed_fista(p, 0.05, 3, x0);
    EXPECT_LE(mixed.cost_trace.back(), mixed.cost_trace.front());
  }
}

TEST(MixedFista, MaximumRegularizationGivesZero) {
  for (int t = 0; t < 5; ++t) {
    const Instance inst = gaussian_instance(10, 8, 15, 3, 2, 10.0, 10.0, 900 + t);
    const SolverReport rep = mixed_fista(inst.y, inst.d, MixingOperator::dense(inst.b), 1.0, 2, Matrix::Zero(15, 3));
    EXPECT_TRUE(rep.raw_codes.isZero(0.0));
  }
}

TEST(MixedFista, RankOneMatchesBlockFista) {
  const Instance inst = gaussian_instance(15, 10, 25, 1, 3, 1.0, 10.0, 950);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem p(inst.y, inst.d, mix);
  FistaOptions opts;
  opts.stop.rel_tol = 1e-15;
  opts.stop.max_iter = 100000;
  const SolverReport mixed = mixed_fista(p, 0.2, 3, Matrix::Zero(25, 1), opts);
  const SolverReport block = block_fista(p, Vector::Constant(1, 0.2), 3, Matrix::Zero(25, 1), opts);
  const Vector lambdas = 0.2 * lambda_max_block(p);
  EXPECT_NEAR(penalized(p, mixed.raw_codes, lambdas), penalized(p, block.raw_codes, lambdas), 1e-8);
}

TEST(Solvers, NonnegBlockFistaStaysNonnegative) {
  std::mt19937_64 rng(14);
  auto [d, norms] = normalize_columns(gen_dictionary_raw(20, 30, 14));
  const SparseCodes x = gen_codes(30, 3, 3, 15, true);
  const Matrix b = gen_mixing(15, 3, 10.0, 16);
  const Matrix y = add_noise_snr(d.matrix() * x.values * b.transpose(), 10.0, 17);
  FistaOptions opts;
  opts.nonneg = true;
  const SolverReport rep = block_fista(y, d, MixingOperator::dense(b), Vector::Constant(3, 0.01), 3, Matrix::Zero(30, 3), opts);
  EXPECT_GE(rep.raw_codes.minCoeff(), 0.0);
  EXPECT_GE(rep.codes.values.minCoeff(), 0.0);
  EXPECT_LE(max_column_nnz(rep.codes.values), 3);
}

// ------------------------------------------------------------------ debias and shared invariants

TEST(Debias, TrueSupportNoiselessIsExact) {
  const Instance inst = gaussian_instance(20, 15, 30, 3, 4, 10.0, std::numeric_limits<double>::infinity(), 1000);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem p(inst.y, inst.d, mix);
  const SparseCodes out = debias(p, inst.truth.values, 4, false);
  EXPECT_LT((out.values - inst.truth.values).norm(), 1e-10 * inst.truth.values.norm());
  EXPECT_TRUE(debias(p, Matrix::Zero(30, 3), 4, false).values.isZero(0.0));
}

TEST(Debias, TruncatesToK) {
  const Instance inst = gaussian_instance(20, 15, 30, 3, 4, 10.0, 20.0, 1001);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem p(inst.y, inst.d, mix);
  std::mt19937_64 rng(1);
  const SparseCodes out = debias(p, oracle::random_matrix(30, 3, rng), 4, false);
  EXPECT_LE(max_column_nnz(out.values), 4);
}

TEST(Solvers, AtMostKPerColumn) {
  const Instance inst = gaussian_instance(20, 15, 40, 4, 3, 100.0, 5.0, 1100);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem p(inst.y, inst.d, mix);
  const Matrix x0 = Matrix::Zero(40, 4);
  EXPECT_LE(max_column_nnz(trick_omp(p, 3).codes.values), 3);
  EXPECT_LE(max_column_nnz(iht(p, 3, x0).codes.values), 3);
  EXPECT_LE(max_column_nnz(homp(p, 3, x0).codes.values), 3);
  EXPECT_LE(max_column_nnz(block_fista(p, Vector::Constant(4, 1e-3), 3, x0).codes.values), 3);
  EXPECT_LE(max_column_nnz(mixed_fista(p, 1e-3, 3, x0).codes.values), 3);
}

TEST(Solvers, SupportsInvariantUnderMixingScale) {
  const Instance inst = gaussian_instance(20, 15, 40, 4, 3, 10.0, 15.0, 1200);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MixingOperator scaled = MixingOperator::dense(3.7 * inst.b);
  const Matrix x0 = Matrix::Zero(40, 4);
  EXPECT_EQ(trick_omp(inst.y, inst.d, mix, 3).codes.support, trick_omp(inst.y, inst.d, scaled, 3).codes.support);
  EXPECT_EQ(homp(inst.y, inst.d, mix, 3, x0).codes.support, homp(inst.y, inst.d, scaled, 3, x0).codes.support);
  const Vector alpha = Vector::Constant(4, 0.01);
  EXPECT_EQ(block_fista(inst.y, inst.d, mix, alpha, 3, x0).codes.support,
            block_fista(inst.y, inst.d, scaled, alpha, 3, x0).codes.support);
}

TEST(Solvers, GroundTruthIsFixedPoint) {
  const Instance inst = gaussian_instance(25, 20, 40, 3, 3, 5.0, std::numeric_limits<double>::infinity(), 1300);
  const MixingOperator mix = MixingOperator::dense(inst.b);
  const MscProblem p(inst.y, inst.d, mix);
  const Matrix& x = inst.truth.values;
  const double tol = 1e-10 * x.norm();
  EXPECT_LT((iht(p, 3, x).codes.values - x).norm(), tol);
  EXPECT_LT((block_fista(p, Vector::Zero(3), 3, x).codes.values - x).norm(), tol);
  EXPECT_LT((mixed_fista(p, 0.0, 3, x).codes.values - x).norm(), tol);
}

TEST(StoppingRule, Validation) {
  StoppingRule s;
  EXPECT_NO_THROW(s.validate());
  s.rel_tol = 0.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s.rel_tol = 1e-6;
  s.max_iter = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}
