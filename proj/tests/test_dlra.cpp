#include "msc/dictionaries.hpp"
#include "msc/dlra.hpp"
#include "msc/generators.hpp"
#include "msc/metrics.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace msc;

namespace {

Index max_column_nnz(const Matrix& x) {
  Index best = 0;
  for (Index j = 0; j < x.cols(); ++j) best = std::max<Index>(best, (x.col(j).array().abs() > kSupportTolerance).count());
  return best;
}

struct DmfInstance {
  DlraData data;
  DlraModel model;
  DlraFactors truth;
};

DmfInstance dmf_instance(Index n, Index m, Index d, Index r, Index k, double snr_db, std::uint64_t seed,
                         bool nonneg = false) {
  std::mt19937_64 rng(seed);
  DmfInstance inst;
  inst.model.kind = nonneg ? DlraKind::nonneg_matrix_factorization : DlraKind::matrix_factorization;
  inst.model.rank = r;
  Matrix raw = oracle::random_matrix(n, d, rng);
  if (nonneg) raw = raw.cwiseAbs();
  inst.model.mode0 = {normalize_columns(raw).first, k};
  inst.truth.x = gen_codes(d, r, k, seed + 1, nonneg).values;
  inst.truth.b = nonneg ? Matrix(oracle::random_matrix(m, r, rng).cwiseAbs()) : oracle::random_matrix(m, r, rng);
  const Matrix y = inst.model.mode0.dictionary.matrix() * inst.truth.x * inst.truth.b.transpose();
  inst.data = DlraData::from_matrix(add_noise_snr(y, snr_db, seed + 2));
  return inst;
}

}  // namespace

TEST(DlraKind, ParseRoundTrip) {
  for (const char* name : {"dmf", "dnmf", "dcpd", "nndcpd"}) EXPECT_EQ(to_string(parse_kind(name)), name);
  EXPECT_THROW(parse_kind("tucker"), std::invalid_argument);
  EXPECT_TRUE(is_nonneg(DlraKind::nonneg_cpd));
  EXPECT_TRUE(is_cpd(DlraKind::cpd));
  EXPECT_FALSE(is_cpd(DlraKind::nonneg_matrix_factorization));
}

TEST(DlraModel, Validation) {
  DlraModel model;
  model.rank = 2;
  model.mode0 = {normalize_columns(Matrix::Identity(4, 4)).first, 0};
  EXPECT_THROW(model.validate(), std::invalid_argument);
  model.mode0.k = 2;
  EXPECT_NO_THROW(model.validate());
  model.mode1 = ModeConstraint{normalize_columns(Matrix::Identity(3, 3)).first, 1};
  EXPECT_THROW(model.validate(), std::invalid_argument);
  TunerConfig tuner;
  tuner.alpha0 = Vector::Constant(1, 1.5);
  EXPECT_THROW(tuner.validate(), std::invalid_argument);
}

TEST(AoDlra, IdentityDictionaryIsAlternatingLeastSquares) {
  std::mt19937_64 rng(1);
  const Index n = 8, m = 7, r = 3;
  const Matrix y = oracle::random_matrix(n, m, rng);
  DlraModel model;
  model.rank = r;
  model.mode0 = {normalize_columns(Matrix::Identity(n, n)).first, n};
  const DlraData data = DlraData::from_matrix(y);
  const DlraFactors init = random_init(data, model, 2);
  DlraOptions opts;
  opts.l_max = 15;
  const DlraReport rep = ao_dlra(data, model, TunerConfig{}, init, opts);

  Matrix a = init.x, b;
  for (int l = 0; l < opts.l_max; ++l) {
    b = (a.transpose() * a).ldlt().solve(a.transpose() * y).transpose();
    a = (b.transpose() * b).ldlt().solve(b.transpose() * y.transpose()).transpose();
    const double cost = (y - a * b.transpose()).squaredNorm();
    EXPECT_NEAR(rep.cost_trace[static_cast<std::size_t>(l)] / cost, 1.0, 1e-8);
  }
}

TEST(AoDlra, GroundTruthIsFixedPoint) {
  const DmfInstance inst = dmf_instance(20, 20, 25, 3, 2, std::numeric_limits<double>::infinity(), 10);
  DlraOptions opts;
  opts.l_max = 5;
  const DlraReport rep = ao_dlra(inst.data, inst.model, TunerConfig{}, inst.truth, opts);
  EXPECT_LE(rep.best_cost, 1e-12 * inst.data.squared_norm());
  EXPECT_LT((rep.best.x - inst.truth.x).norm(), 1e-6 * inst.truth.x.norm());
}

TEST(AoDlra, BestIterateBookkeepingAndSparsity) {
  const DmfInstance inst = dmf_instance(30, 25, 40, 4, 3, 20.0, 20);
  TunerConfig tuner;
  tuner.tau = 5;
  DlraOptions opts;
  opts.l_max = 20;
  const DlraReport rep = ao_dlra(inst.data, inst.model, tuner, random_init(inst.data, inst.model, 21), opts);
  ASSERT_EQ(rep.cost_trace.size(), 20u);
  EXPECT_DOUBLE_EQ(rep.best_cost, *std::min_element(rep.cost_trace.begin(), rep.cost_trace.end()));
  for (std::size_t i = 1; i < rep.best_cost_trace.size(); ++i) EXPECT_LE(rep.best_cost_trace[i], rep.best_cost_trace[i - 1]);
  EXPECT_NEAR(dlra_cost(inst.data, inst.model, rep.best), rep.best_cost, 1e-10 * rep.best_cost);
  if (rep.tuner_failures == 0)
    for (Index nnz : rep.pre_debias_max_nnz) EXPECT_LE(nnz, 3 + 5);
  EXPECT_LE(max_column_nnz(rep.best.x), 3);
  EXPECT_LE(max_column_nnz(rep.last.x), 3);
  EXPECT_EQ(rep.alpha_trace.size(), 20u);
}

TEST(AoDlra, TunerFailureFallsBackWithWarning) {
  const DmfInstance inst = dmf_instance(15, 12, 20, 2, 2, 10.0, 30);
  TunerConfig tuner;
  tuner.tau = 0;
  tuner.max_tuner_rounds = 0;
  tuner.alpha0 = Vector::Constant(1, 1e-9);
  DlraOptions opts;
  opts.l_max = 3;
  const DlraReport rep = ao_dlra(inst.data, inst.model, tuner, random_init(inst.data, inst.model, 31), opts);
  EXPECT_GT(rep.tuner_failures, 0);
  EXPECT_FALSE(rep.warnings.empty());
  EXPECT_LE(max_column_nnz(rep.last.x), 2);
}

TEST(AoDlra, NonnegativeKindsStayNonnegative) {
  const DmfInstance inst = dmf_instance(20, 15, 30, 3, 3, 20.0, 40, true);
  DlraOptions opts;
  opts.l_max = 10;
  const DlraReport rep = ao_dlra(inst.data, inst.model, TunerConfig{}, random_init(inst.data, inst.model, 41), opts);
  EXPECT_GE(rep.best.x.minCoeff(), 0.0);
  EXPECT_GE(rep.best.b.minCoeff(), 0.0);
  EXPECT_GE(rep.last.x.minCoeff(), 0.0);
  EXPECT_GE(rep.last.b.minCoeff(), 0.0);
}

TEST(AoDlra, TwoModeNonnegCpd) {
  std::mt19937_64 rng(50);
  DlraModel model;
  model.kind = DlraKind::nonneg_cpd;
  model.rank = 2;
  model.mode0 = {build_bspline_dictionary(15, 12), 3};
  model.mode1 = ModeConstraint{build_bspline_dictionary(10, 8), 2};
  const Matrix a = model.mode0.dictionary.matrix() * gen_codes(12, 2, 3, 51, true).values;
  const Matrix b = model.mode1->dictionary.matrix() * gen_codes(8, 2, 2, 52, true).values;
  const Matrix c = oracle::random_matrix(4, 2, rng).cwiseAbs();
  const DlraData data = DlraData::from_tensor(add_noise_snr(cpd_reconstruct({a, b, c}), 30.0, 53));
  DlraOptions opts;
  opts.l_max = 15;
  TunerConfig tuner;
  tuner.tau = 3;
  const DlraReport rep = ao_dlra(data, model, tuner, init_by_lra(data, model, 54, 200), opts);
  const DlraFactors& f = rep.best;
  EXPECT_LT((f.b - model.mode1->dictionary.matrix() * f.x2).norm(), 1e-10 * std::max(1.0, f.b.norm()));
  EXPECT_GE(f.x.minCoeff(), 0.0);
  EXPECT_GE(f.x2.minCoeff(), 0.0);
  EXPECT_GE(f.c.minCoeff(), 0.0);
  EXPECT_LE(max_column_nnz(f.x), 3);
  EXPECT_LE(max_column_nnz(f.x2), 2);
  EXPECT_LT(std::sqrt(rep.best_cost / data.squared_norm()), 0.5);
}

TEST(Ipalm, GroundTruthIsStationary) {
  const DmfInstance inst = dmf_instance(20, 20, 25, 3, 2, std::numeric_limits<double>::infinity(), 60);
  for (double mu : {0.5, 1.0}) {
    const DlraReport rep = ipalm(inst.data, inst.model, 20, mu, inst.truth);
    EXPECT_LT((rep.last.x - inst.truth.x).norm(), 1e-10 * inst.truth.x.norm());
    EXPECT_LT((rep.last.b - inst.truth.b).norm(), 1e-10 * inst.truth.b.norm());
  }
}

TEST(Ipalm, DecreasesCostAndStaysFeasible) {
  int decreased = 0;
  for (int t = 0; t < 50; ++t) {
    const DmfInstance inst = dmf_instance(12, 10, 15, 2, 2, 20.0, 100 + 3 * t);
    const DlraFactors init = random_init(inst.data, inst.model, 500 + t);
    for (double mu : {0.5, 1.0}) {
      const DlraReport rep = ipalm(inst.data, inst.model, 50, mu, init);
      EXPECT_LE(max_column_nnz(rep.last.x), 2);
      EXPECT_LE(max_column_nnz(rep.best.x), 2);
      if (mu == 0.5 && rep.cost_trace.back() <= rep.cost_trace.front()) ++decreased;
    }
  }
  EXPECT_GE(decreased, 48);
}

TEST(InitByLra, RankOneTensorPicksTrueAtom) {
  std::mt19937_64 rng(70);
  const Dictionary d = normalize_columns(oracle::random_matrix(10, 15, rng)).first;
  const Matrix a = 2.5 * d.matrix().col(7);
  const Tensor3 t = cpd_reconstruct({a, oracle::random_matrix(4, 1, rng), oracle::random_matrix(5, 1, rng)});
  DlraModel model;
  model.kind = DlraKind::cpd;
  model.rank = 1;
  model.mode0 = {d, 1};
  const DlraFactors f = init_by_lra(DlraData::from_tensor(t), model, 71);
  EXPECT_EQ(max_column_nnz(f.x), 1);
  EXPECT_GT(std::abs(f.x(7, 0)), 0.0);
}

TEST(InitByLra, DeterministicAndSparse) {
  const DmfInstance inst = dmf_instance(20, 15, 30, 3, 4, 10.0, 80);
  const DlraFactors a = init_by_lra(inst.data, inst.model, 81);
  const DlraFactors b = init_by_lra(inst.data, inst.model, 81);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.b, b.b);
  EXPECT_LE(max_column_nnz(a.x), 4);
  const DmfInstance nn = dmf_instance(20, 15, 30, 3, 4, 10.0, 82, true);
  const DlraFactors c = init_by_lra(nn.data, nn.model, 83);
  EXPECT_GE(c.x.minCoeff(), 0.0);
  EXPECT_GE(c.b.minCoeff(), 0.0);
}

TEST(NmfHals, NonnegativeFactors) {
  std::mt19937_64 rng(90);
  const Matrix y = oracle::random_matrix(12, 3, rng).cwiseAbs() * oracle::random_matrix(10, 3, rng).cwiseAbs().transpose();
  const auto [w, h] = nmf_hals(y, 3, 500, 91);
  EXPECT_GE(w.minCoeff(), 0.0);
  EXPECT_GE(h.minCoeff(), 0.0);
  EXPECT_LT((y - w * h.transpose()).norm() / y.norm(), 1e-2);
}

namespace {

struct CompletionSetup {
  Matrix y;
  Matrix dictionary;
};

CompletionSetup low_rank_image(std::uint64_t seed) {
  CompletionSetup s;
  s.dictionary = build_dct2_dictionary(8, 8).matrix();
  Matrix x = Matrix::Zero(64, 2);
  // smooth abundances on a few low-frequency atoms
  const std::vector<Index> atoms{0, 1, 8, 9, 2, 16};
  const SparseCodes local = gen_codes(6, 2, 3, seed);
  for (Index j = 0; j < 6; ++j) x.row(atoms[static_cast<std::size_t>(j)]) = local.values.row(j);
  std::mt19937_64 rng(seed + 1);
  const Matrix spectra = oracle::random_matrix(20, 2, rng);
  s.y = s.dictionary * x * spectra.transpose();
  return s;
}

}  // namespace

TEST(Completion, NoMissingRowsIsPlainDmf) {
  const CompletionSetup s = low_rank_image(100);
  CompletionConfig cfg;
  cfg.rank = 2;
  cfg.k = 3;
  cfg.options.l_max = 10;
  const CompletionResult res = complete_missing_rows(s.y, s.dictionary, {}, cfg);
  EXPECT_EQ(res.missing_rows.rows(), 0);
  EXPECT_LT(res.observed_rel_residual, 1.0);
}

TEST(Completion, NoiselessLowRankRowsRecovered) {
  const CompletionSetup s = low_rank_image(110);
  std::vector<Index> missing{3, 11, 19, 27, 36, 45};
  CompletionConfig cfg;
  cfg.rank = 2;
  cfg.k = 3;
  cfg.n_inits = 5;
  cfg.seed = 7;
  const CompletionResult res = complete_missing_rows(s.y, s.dictionary, missing, cfg);
  const Matrix truth = s.y(missing, Eigen::all);
  EXPECT_LE(rel_error(truth, res.missing_rows), 1e-3);
  EXPECT_LE(res.observed_rel_residual, 1e-3);
}

TEST(Completion, InvalidMasksRejected) {
  const CompletionSetup s = low_rank_image(120);
  CompletionConfig cfg;
  cfg.rank = 2;
  cfg.k = 3;
  EXPECT_THROW(complete_missing_rows(s.y, s.dictionary, {64}, cfg), DimensionError);
  EXPECT_THROW(complete_missing_rows(s.y, s.dictionary, {2, 2}, cfg), DimensionError);
  std::vector<Index> all(64);
  std::iota(all.begin(), all.end(), Index{0});
  EXPECT_THROW(complete_missing_rows(s.y, s.dictionary, all, cfg), std::invalid_argument);
}
