#include "msc/dlra.hpp"

#include "msc/prox.hpp"
#include "msc/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace msc {

bool is_nonneg(DlraKind kind) {
  return kind == DlraKind::nonneg_matrix_factorization || kind == DlraKind::nonneg_cpd;
}

bool is_cpd(DlraKind kind) { return kind == DlraKind::cpd || kind == DlraKind::nonneg_cpd; }

std::string to_string(DlraKind kind) {
  switch (kind) {
    case DlraKind::matrix_factorization: return "dmf";
    case DlraKind::nonneg_matrix_factorization: return "dnmf";
    case DlraKind::cpd: return "dcpd";
    case DlraKind::nonneg_cpd: return "nndcpd";
  }
  return "unknown";
}

DlraKind parse_kind(const std::string& name) {
  if (name == "dmf") return DlraKind::matrix_factorization;
  if (name == "dnmf") return DlraKind::nonneg_matrix_factorization;
  if (name == "dcpd") return DlraKind::cpd;
  if (name == "nndcpd") return DlraKind::nonneg_cpd;
  throw std::invalid_argument("unknown model '" + name + "' (expected dmf, dnmf, dcpd or nndcpd)");
}

void DlraModel::validate() const {
  if (rank < 1) throw std::invalid_argument("DlraModel: rank must be at least 1");
  auto check = [](const ModeConstraint& m, const char* name) {
    if (m.dictionary.atoms() == 0) throw std::invalid_argument(std::string("DlraModel: empty dictionary on ") + name);
    if (m.k < 1 || m.k > m.dictionary.atoms())
      throw std::invalid_argument(std::string("DlraModel: k outside [1, d] on ") + name);
  };
  check(mode0, "mode 0");
  if (mode1) {
    if (!is_cpd(kind)) throw std::invalid_argument("DlraModel: a second dictionary needs a CPD kind");
    check(*mode1, "mode 1");
  }
}

void TunerConfig::validate() const {
  if (alpha0.size() == 0) throw std::invalid_argument("TunerConfig: alpha0 is empty");
  for (Index i = 0; i < alpha0.size(); ++i)
    if (!(alpha0(i) >= 0.0 && alpha0(i) <= 1.0)) throw std::invalid_argument("TunerConfig: alpha0 outside [0, 1]");
  if (tau < 0) throw std::invalid_argument("TunerConfig: tau must be nonnegative");
  if (!(decrease_factor > 1.0) || !(increase_factor > 1.0))
    throw std::invalid_argument("TunerConfig: adjustment factors must exceed 1");
  if (max_tuner_rounds < 0) throw std::invalid_argument("TunerConfig: negative max_tuner_rounds");
}

namespace {

void check_data(const DlraData& data, const DlraModel& model) {
  model.validate();
  if (data.is_tensor != is_cpd(model.kind))
    throw DimensionError(std::string("model ") + to_string(model.kind) + " expects " +
                         (is_cpd(model.kind) ? "a tensor" : "a matrix"));
  const Index n = data.is_tensor ? data.tensor.dim(0) : data.matrix.rows();
  if (n != model.mode0.dictionary.signal_size())
    throw DimensionError("dictionary has " + std::to_string(model.mode0.dictionary.signal_size()) +
                         " rows but the data has " + std::to_string(n));
  if (model.mode1 && data.tensor.dim(1) != model.mode1->dictionary.signal_size())
    throw DimensionError("second dictionary does not match the tensor's second dimension");
}

void check_factors(const DlraData& data, const DlraModel& model, const DlraFactors& f) {
  const Index r = model.rank;
  if (f.x.rows() != model.mode0.dictionary.atoms() || f.x.cols() != r)
    throw DimensionError("initial codes have the wrong shape");
  const Index m1 = data.is_tensor ? data.tensor.dim(1) : data.matrix.cols();
  if (model.mode1) {
    if (f.x2.rows() != model.mode1->dictionary.atoms() || f.x2.cols() != r)
      throw DimensionError("initial mode-1 codes have the wrong shape");
  } else if (f.b.rows() != m1 || f.b.cols() != r) {
    throw DimensionError("initial B has the wrong shape");
  }
  if (data.is_tensor && (f.c.rows() != data.tensor.dim(2) || f.c.cols() != r))
    throw DimensionError("initial C has the wrong shape");
}

Vector broadcast(const Vector& alpha, Index r) {
  if (alpha.size() == 1) return Vector::Constant(r, alpha(0));
  if (alpha.size() != r) throw DimensionError("alpha0 must have 1 or r entries");
  return alpha;
}

Index column_nnz(const Matrix& x, Index col) {
  Index c = 0;
  for (Index i = 0; i < x.rows(); ++i)
    if (std::abs(x(i, col)) > kSupportTolerance) ++c;
  return c;
}

// factor = rhs^T gram^{-1} written as solve(gram + ridge I, rhs)^T.
Matrix ridge_solve(const Matrix& gram, const Matrix& rhs, double ridge) {
  Matrix g = gram;
  g.diagonal().array() += ridge;
  Eigen::LDLT<Matrix> ldlt(g);
  return ldlt.solve(rhs).transpose();
}

void projected_gradient(Matrix& factor, const Matrix& mtk, const Matrix& gram, int iters) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lip = eig.eigenvalues().maxCoeff();
  if (!(lip > 0)) return;
  for (int it = 0; it < iters; ++it) factor = (factor - (factor * gram - mtk) / lip).cwiseMax(0.0);
}

Matrix cpd_gram(const Matrix& p, const Matrix& q) {
  return (p.transpose() * p).cwiseProduct(q.transpose() * q);
}

struct CodeUpdate {
  Matrix x;
  Index max_nnz = 0;
  bool tuner_failed = false;
};

// Block-FISTA + regularization tuning + debias for one constrained mode.
CodeUpdate update_codes(const MscProblem& problem, const Matrix& x_prev, Vector& alpha, Index k,
                        const TunerConfig& tuner, bool nonneg, const DlraOptions& options) {
  FistaOptions fo;
  fo.stop = options.fista;
  fo.nonneg = nonneg;
  fo.skip_debias = true;
  const Index r = problem.rank();
  const Index hi = k + tuner.tau;

  Matrix x = block_fista(problem, alpha, k, x_prev, fo).raw_codes;
  CodeUpdate out;
  for (int round = 0;; ++round) {
    bool outside = false;
    for (Index i = 0; i < r; ++i) {
      const Index nnz = column_nnz(x, i);
      if (nnz < k || nnz > hi) outside = true;
    }
    if (!outside) break;
    bool changed = false;
    if (round < tuner.max_tuner_rounds) {
      for (Index i = 0; i < r; ++i) {
        const Index nnz = column_nnz(x, i);
        const double before = alpha(i);
        if (nnz <= k)
          alpha(i) /= tuner.decrease_factor;
        else if (nnz >= hi)
          alpha(i) = std::min(tuner.increase_factor * alpha(i), 1.0);
        changed = changed || alpha(i) != before;
      }
    }
    if (!changed) {
      out.tuner_failed = true;
      x = nonneg ? prox::nonneg_hard_threshold_columns(x, k) : prox::hard_threshold_columns(x, k);
      break;
    }
    x = block_fista(problem, alpha, k, x, fo).raw_codes;
  }
  for (Index i = 0; i < r; ++i) out.max_nnz = std::max(out.max_nnz, column_nnz(x, i));
  out.x = debias(problem, x, k, nonneg, options.ridge).values;
  return out;
}

Matrix dictionary_codes(const Matrix& target, const ModeConstraint& mode, bool nonneg) {
  Matrix x(mode.dictionary.atoms(), target.cols());
  const Index k = std::min(mode.k, mode.dictionary.signal_size());
  for (Index i = 0; i < target.cols(); ++i) x.col(i) = omp(target.col(i), mode.dictionary, k).x;
  return nonneg ? Matrix(x.cwiseMax(0.0)) : x;
}

void record_iterate(DlraReport& report, const DlraFactors& f, double cost) {
  report.cost_trace.push_back(cost);
  if (report.best_cost_trace.empty() || cost < report.best_cost) {
    report.best = f;
    report.best_cost = cost;
  }
  report.best_cost_trace.push_back(report.best_cost);
}

}  // namespace

double dlra_cost(const DlraData& data, const DlraModel& model, const DlraFactors& f) {
  const Matrix a = model.mode0.dictionary.matrix() * f.x;
  if (!data.is_tensor) return (data.matrix - a * f.b.transpose()).squaredNorm();
  return cpd_cost(data.tensor, {a, f.b, f.c});
}

DlraFactors random_init(const DlraData& data, const DlraModel& model, std::uint64_t seed) {
  check_data(data, model);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool nonneg = is_nonneg(model.kind);
  auto draw = [&](Index rows) {
    Matrix m(rows, model.rank);
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = nonneg ? std::abs(normal(rng)) : normal(rng);
    return m;
  };
  DlraFactors f;
  f.x = draw(model.mode0.dictionary.atoms());
  if (model.mode1) {
    f.x2 = draw(model.mode1->dictionary.atoms());
    f.b = model.mode1->dictionary.matrix() * f.x2;
  } else {
    f.b = draw(data.is_tensor ? data.tensor.dim(1) : data.matrix.cols());
  }
  if (data.is_tensor) f.c = draw(data.tensor.dim(2));
  return f;
}

DlraReport ao_dlra(const DlraData& data, const DlraModel& model, const TunerConfig& tuner,
                   const DlraFactors& init, const DlraOptions& options) {
  check_data(data, model);
  tuner.validate();
  check_factors(data, model, init);
  if (options.l_max < 0) throw std::invalid_argument("ao_dlra: negative l_max");

  const bool nonneg = is_nonneg(model.kind);
  const Dictionary& d0 = model.mode0.dictionary;
  const double y_norm_sq = data.squared_norm();
  // D^T Y_(1), and D2^T Y_(2) for two-mode models.
  const Matrix dty = d0.matrix().transpose() * (data.is_tensor ? unfold1(data.tensor) : data.matrix);
  const Matrix y2 = model.mode1 ? unfold2(data.tensor) : Matrix();
  const Matrix d2ty = model.mode1 ? Matrix(model.mode1->dictionary.matrix().transpose() * y2) : Matrix();

  DlraFactors f = init;
  if (model.mode1) f.b = model.mode1->dictionary.matrix() * f.x2;
  Vector alpha = broadcast(tuner.alpha0, model.rank);
  Vector alpha2 = alpha;

  DlraReport report;
  report.best_cost = std::numeric_limits<double>::infinity();
  for (int l = 1; l <= options.l_max; ++l) {
    const Matrix a = d0.matrix() * f.x;
    if (!data.is_tensor) {
      const Matrix yta = data.matrix.transpose() * a;
      const Matrix gram = a.transpose() * a;
      if (nonneg)
        projected_gradient(f.b, yta, gram, options.nonneg_inner_iters);
      else
        f.b = ridge_solve(gram, yta.transpose(), options.ridge);
    } else {
      if (model.mode1) {
        const MixingOperator mix = MixingOperator::khatri_rao(a, f.c);
        const MscProblem problem(model.mode1->dictionary, mix, mix.right_apply(d2ty), y_norm_sq);
        CodeUpdate up = update_codes(problem, f.x2, alpha2, model.mode1->k, tuner, nonneg, options);
        if (up.tuner_failed) {
          ++report.tuner_failures;
          report.warnings.push_back("iteration " + std::to_string(l) +
                                    ": mode-1 tuner did not reach the sparsity window, codes truncated");
        }
        f.x2 = std::move(up.x);
        f.b = model.mode1->dictionary.matrix() * f.x2;
      } else {
        const Matrix gram = cpd_gram(a, f.c);
        const Matrix mtk = mttkrp(data.tensor, CpdFactors{a, f.b, f.c}, 1);
        if (nonneg)
          hals_update(f.b, mtk, gram);
        else
          f.b = ridge_solve(gram, mtk.transpose(), options.ridge);
      }
      const Matrix gram = cpd_gram(a, f.b);
      const Matrix mtk = mttkrp(data.tensor, CpdFactors{a, f.b, f.c}, 2);
      if (nonneg)
        hals_update(f.c, mtk, gram);
      else
        f.c = ridge_solve(gram, mtk.transpose(), options.ridge);
    }

    const MixingOperator mix =
        data.is_tensor ? MixingOperator::khatri_rao(f.b, f.c) : MixingOperator::dense(f.b);
    const MscProblem problem(d0, mix, mix.right_apply(dty), y_norm_sq);
    CodeUpdate up = update_codes(problem, f.x, alpha, model.mode0.k, tuner, nonneg, options);
    if (up.tuner_failed) {
      ++report.tuner_failures;
      report.warnings.push_back("iteration " + std::to_string(l) +
                                ": tuner did not reach the sparsity window, codes truncated");
    }
    f.x = std::move(up.x);
    report.pre_debias_max_nnz.push_back(up.max_nnz);
    report.alpha_trace.push_back(alpha);
    report.iterations = l;
    record_iterate(report, f, dlra_cost(data, model, f));
  }
  if (report.cost_trace.empty()) {
    report.best = f;
    report.best_cost = dlra_cost(data, model, f);
  }
  report.last = std::move(f);
  return report;
}

DlraReport ipalm(const DlraData& data, const DlraModel& model, int l_max, double mu, const DlraFactors& init) {
  check_data(data, model);
  check_factors(data, model, init);
  if (!(mu > 0.0 && mu <= 1.0)) throw std::invalid_argument("ipalm: mu must lie in (0, 1]");
  if (l_max < 0) throw std::invalid_argument("ipalm: negative l_max");

  const bool nonneg = is_nonneg(model.kind);
  const Dictionary& d0 = model.mode0.dictionary;
  const Index k = model.mode0.k;
  const Matrix dty = d0.matrix().transpose() * (data.is_tensor ? unfold1(data.tensor) : data.matrix);
  const double eps_d = d0.gram().norm();
  const Matrix d2ty = model.mode1 ? Matrix(model.mode1->dictionary.matrix().transpose() * unfold2(data.tensor))
                                  : Matrix();
  const double eps_d2 = model.mode1 ? model.mode1->dictionary.gram().norm() : 0.0;

  auto threshold = [&](const Matrix& v, Index kk) {
    return nonneg ? prox::nonneg_hard_threshold_columns(v, kk) : prox::hard_threshold_columns(v, kk);
  };
  auto gradient_step = [&](Matrix& factor, const Matrix& mtk, const Matrix& gram) {
    const double scale = gram.norm();
    if (!(scale > 0)) return;
    factor -= (mu / scale) * (factor * gram - mtk);
    if (nonneg) factor = factor.cwiseMax(0.0);
  };

  DlraFactors f = init;
  if (model.mode1) f.b = model.mode1->dictionary.matrix() * f.x2;
  Matrix z = f.x;
  Matrix z2 = f.x2;

  DlraReport report;
  double cost = dlra_cost(data, model, f);
  report.cost_trace.push_back(cost);
  report.best = f;
  report.best_cost = cost;
  report.best_cost_trace.push_back(cost);
  for (int l = 1; l <= l_max; ++l) {
    const double beta = static_cast<double>(l - 1) / static_cast<double>(l + 2);
    const Matrix a = d0.matrix() * f.x;
    if (!data.is_tensor) {
      gradient_step(f.b, data.matrix.transpose() * a, a.transpose() * a);
    } else {
      if (model.mode1) {
        const Matrix v = cpd_gram(a, f.c);
        const Matrix dtym = model.mode1->dictionary.matrix().transpose() *
                            mttkrp(data.tensor, CpdFactors{a, f.b, f.c}, 1);
        const double scale = eps_d2 * v.norm();
        const Matrix x_old = f.x2;
        if (scale > 0) f.x2 = threshold(z2 - (mu / scale) * (model.mode1->dictionary.gram() * z2 * v - dtym),
                                        model.mode1->k);
        z2 = f.x2 + beta * (f.x2 - x_old);
        f.b = model.mode1->dictionary.matrix() * f.x2;
      } else {
        gradient_step(f.b, mttkrp(data.tensor, CpdFactors{a, f.b, f.c}, 1), cpd_gram(a, f.c));
      }
      gradient_step(f.c, mttkrp(data.tensor, CpdFactors{a, f.b, f.c}, 2), cpd_gram(a, f.b));
    }

    const MixingOperator mix =
        data.is_tensor ? MixingOperator::khatri_rao(f.b, f.c) : MixingOperator::dense(f.b);
    const Matrix& v = mix.gram();
    const Matrix dtym = mix.right_apply(dty);
    const double scale = eps_d * v.norm();
    const Matrix x_old = f.x;
    if (scale > 0) f.x = threshold(z - (mu / scale) * (d0.gram() * z * v - dtym), k);
    z = f.x + beta * (f.x - x_old);

    const double next = dlra_cost(data, model, f);
    report.iterations = l;
    record_iterate(report, f, next);
    const bool done = cost <= 0.0 || std::abs(cost - next) / cost < 1e-8;
    cost = next;
    if (done) break;
  }
  report.last = std::move(f);
  return report;
}

std::pair<Matrix, Matrix> nmf_hals(const Matrix& y, Index r, int iters, std::uint64_t seed) {
  if (r < 1) throw std::invalid_argument("nmf_hals: rank must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix w(y.rows(), r);
  Matrix h(y.cols(), r);
  for (Index j = 0; j < r; ++j) {
    for (Index i = 0; i < w.rows(); ++i) w(i, j) = uniform(rng);
    for (Index i = 0; i < h.rows(); ++i) h(i, j) = uniform(rng);
  }
  double cost = (y - w * h.transpose()).squaredNorm();
  for (int it = 0; it < iters; ++it) {
    hals_update(h, y.transpose() * w, w.transpose() * w);
    hals_update(w, y * h, h.transpose() * h);
    const double next = (y - w * h.transpose()).squaredNorm();
    const bool done = cost <= 0.0 || (cost - next) / cost < 1e-8;
    cost = next;
    if (done) break;
  }
  return {w, h};
}

DlraFactors init_by_lra(const DlraData& data, const DlraModel& model, std::uint64_t seed, int lra_iters) {
  check_data(data, model);
  const Index r = model.rank;
  const bool nonneg = is_nonneg(model.kind);
  Matrix a0;
  DlraFactors f;
  switch (model.kind) {
    case DlraKind::matrix_factorization: {
      Eigen::BDCSVD<Matrix> svd(data.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Index kept = std::min<Index>(r, svd.singularValues().size());
      a0 = Matrix::Zero(data.matrix.rows(), r);
      f.b = Matrix::Zero(data.matrix.cols(), r);
      a0.leftCols(kept) = svd.matrixU().leftCols(kept) * svd.singularValues().head(kept).asDiagonal();
      f.b.leftCols(kept) = svd.matrixV().leftCols(kept);
      break;
    }
    case DlraKind::nonneg_matrix_factorization: {
      auto [w, h] = nmf_hals(data.matrix, r, lra_iters, seed);
      a0 = std::move(w);
      f.b = std::move(h);
      break;
    }
    case DlraKind::cpd:
    case DlraKind::nonneg_cpd: {
      CpdResult cpd = cpd_als(data.tensor, r, lra_iters, nonneg, seed);
      a0 = std::move(cpd.factors.a);
      f.b = std::move(cpd.factors.b);
      f.c = std::move(cpd.factors.c);
      break;
    }
  }
  f.x = dictionary_codes(a0, model.mode0, nonneg);
  if (model.mode1) {
    f.x2 = dictionary_codes(f.b, *model.mode1, nonneg);
    f.b = model.mode1->dictionary.matrix() * f.x2;
  }
  return f;
}

CompletionResult complete_missing_rows(const Matrix& y, const Matrix& dictionary, const std::vector<Index>& missing,
                                       const CompletionConfig& config) {
  const Index n = y.rows();
  if (dictionary.rows() != n) throw DimensionError("complete_missing_rows: dictionary and data row counts differ");
  std::vector<bool> is_missing(static_cast<std::size_t>(n), false);
  for (Index i : missing) {
    if (i < 0 || i >= n) throw DimensionError("complete_missing_rows: missing row index out of range");
    if (is_missing[static_cast<std::size_t>(i)]) throw DimensionError("complete_missing_rows: repeated missing row");
    is_missing[static_cast<std::size_t>(i)] = true;
  }
  std::vector<Index> observed;
  for (Index i = 0; i < n; ++i)
    if (!is_missing[static_cast<std::size_t>(i)]) observed.push_back(i);
  if (observed.empty()) throw std::invalid_argument("complete_missing_rows: no observed rows");
  if (config.n_inits < 1) throw std::invalid_argument("complete_missing_rows: n_inits must be at least 1");

  CompletionResult result;
  if (static_cast<Index>(observed.size()) < 2 * config.k)
    result.warnings.push_back("only " + std::to_string(observed.size()) + " observed rows for k=" +
                              std::to_string(config.k));

  const Matrix d_obs_raw = dictionary(observed, Eigen::all);
  std::vector<Index> kept;
  for (Index j = 0; j < d_obs_raw.cols(); ++j) {
    if (d_obs_raw.col(j).norm() > std::numeric_limits<double>::min())
      kept.push_back(j);
    else
      result.dropped_atoms.push_back(j);
  }
  if (kept.empty()) throw NumericalError("complete_missing_rows: every atom vanishes on the observed rows");
  if (!result.dropped_atoms.empty())
    result.warnings.push_back(std::to_string(result.dropped_atoms.size()) +
                              " atoms vanish on the observed rows and were dropped");
  auto [dict_obs, norms] = normalize_columns(d_obs_raw(Eigen::all, kept));

  DlraModel model;
  model.kind = DlraKind::matrix_factorization;
  model.rank = config.rank;
  model.mode0 = {std::move(dict_obs), std::min<Index>(config.k, static_cast<Index>(kept.size()))};
  const DlraData data = DlraData::from_matrix(y(observed, Eigen::all));

  bool have = false;
  for (int init = 0; init < config.n_inits; ++init) {
    const DlraFactors start = random_init(data, model, derive_seed({config.seed, static_cast<std::uint64_t>(init)}));
    DlraReport rep = ao_dlra(data, model, config.tuner, start, config.options);
    if (!have || rep.best_cost < result.report.best_cost) {
      result.report = std::move(rep);
      have = true;
    }
  }
  const DlraFactors& best = result.report.best;
  // codes for the raw restricted atoms, valid for every row of the raw dictionary
  const Matrix x_raw = norms.cwiseInverse().asDiagonal() * best.x;
  const Matrix d_missing = dictionary(missing, kept);
  result.missing_rows = d_missing * x_raw * best.b.transpose();
  const double y_obs_norm = data.matrix.norm();
  result.observed_rel_residual = y_obs_norm > 0 ? std::sqrt(result.report.best_cost) / y_obs_norm : 0.0;
  return result;
}

}  // namespace msc
