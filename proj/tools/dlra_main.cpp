// dlra: dictionary-based low-rank approximation and missing-row completion.
//
//   dlra run --model {dmf|dnmf|dcpd|nndcpd} --data Y --dict D [--dict2 D2]
//            --rank R --k K [--k2 K2] [--alpha A] [--tau T] [--iters L]
//            [--method ao|ipalm] [--mu MU] [--init random|lra] [--seed S] --out dir
//   dlra complete --data Y.csv --mask rows.txt --dict D.csv --rank R --k K
//            [--alpha A] [--tau T] [--iters L] [--seed S] [--inits N] --out dir

#include "msc/dlra.hpp"
#include "msc/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string model = "dmf";
  std::string data, dict, dict2, out;
  msc::Index rank = 1, k = 1, k2 = 0, tau = 20;
  double alpha = 1e-2;
  double mu = 0.5;
  int iters = 100;
  std::string method = "ao";
  std::string init = "random";
  std::uint64_t seed = 0;
};

struct CompleteArgs {
  std::string data, mask, dict, out;
  msc::Index rank = 1, k = 1, tau = 20;
  double alpha = 5e-3;
  int iters = 100;
  int inits = 1;
  std::uint64_t seed = 0;
};

void write_report(const fs::path& path, const msc::DlraReport& rep, double y_norm_sq,
                  const std::vector<std::string>& extra) {
  std::ofstream out(path);
  if (!out) throw msc::IoError("cannot write '" + path.string() + "'");
  out.precision(17);
  for (const auto& line : extra) out << line << "\n";
  out << "iterations = " << rep.iterations << "\n";
  out << "best_cost = " << rep.best_cost << "\n";
  out << "best_rel_error = " << std::sqrt(rep.best_cost / y_norm_sq) << "\n";
  out << "tuner_failures = " << rep.tuner_failures << "\n";
  out << "cost_trace =";
  for (std::size_t i = 0; i < rep.cost_trace.size(); ++i) out << (i ? ", " : " ") << rep.cost_trace[i];
  out << "\n";
  for (const auto& w : rep.warnings) out << "warning = " << w << "\n";
}

int run_model(const RunArgs& a) {
  const msc::DlraKind kind = msc::parse_kind(a.model);
  const msc::DlraData data = msc::is_cpd(kind) ? msc::DlraData::from_tensor(msc::read_tensor(a.data))
                                               : msc::DlraData::from_matrix(msc::read_matrix_csv(a.data));
  msc::DlraModel model;
  model.kind = kind;
  model.rank = a.rank;
  auto [d0, n0] = msc::normalize_columns(msc::read_matrix_csv(a.dict));
  model.mode0 = {d0, a.k};
  msc::Vector n1;
  if (!a.dict2.empty()) {
    auto [d1, norms1] = msc::normalize_columns(msc::read_matrix_csv(a.dict2));
    model.mode1 = msc::ModeConstraint{d1, a.k2 > 0 ? a.k2 : a.k};
    n1 = norms1;
  }
  model.validate();

  const msc::DlraFactors init = a.init == "lra" ? msc::init_by_lra(data, model, a.seed)
                                                : msc::random_init(data, model, a.seed);
  msc::DlraReport rep;
  if (a.method == "ao") {
    msc::TunerConfig tuner;
    tuner.alpha0 = msc::Vector::Constant(1, a.alpha);
    tuner.tau = a.tau;
    msc::DlraOptions opts;
    opts.l_max = a.iters;
    rep = msc::ao_dlra(data, model, tuner, init, opts);
  } else {
    rep = msc::ipalm(data, model, a.iters, a.mu, init);
  }
  const msc::DlraFactors& f = a.method == "ao" ? rep.best : rep.last;

  fs::create_directories(a.out);
  const fs::path out(a.out);
  // codes for the dictionaries as given (not normalized)
  msc::write_matrix_csv((out / "X.csv").string(), n0.cwiseInverse().asDiagonal() * f.x);
  msc::write_matrix_csv((out / "B.csv").string(), f.b);
  if (f.c.size() > 0) msc::write_matrix_csv((out / "C.csv").string(), f.c);
  if (f.x2.size() > 0) msc::write_matrix_csv((out / "X2.csv").string(), n1.cwiseInverse().asDiagonal() * f.x2);
  const double cost = msc::dlra_cost(data, model, f);
  write_report(out / "report.txt", rep, data.squared_norm(),
               {"model = " + a.model, "method = " + a.method, "init = " + a.init,
                "returned_cost = " + std::to_string(cost)});
  std::fprintf(stderr, "dlra %s (%s): relative error %.6g after %d iterations\n", a.model.c_str(), a.method.c_str(),
               std::sqrt(cost / data.squared_norm()), rep.iterations);
  return 0;
}

int run_complete(const CompleteArgs& a) {
  const msc::Matrix y = msc::read_matrix_csv(a.data);
  const std::vector<msc::Index> missing = msc::read_index_list(a.mask);
  msc::CompletionConfig cfg;
  cfg.rank = a.rank;
  cfg.k = a.k;
  cfg.tuner.alpha0 = msc::Vector::Constant(1, a.alpha);
  cfg.tuner.tau = a.tau;
  cfg.options.l_max = a.iters;
  cfg.seed = a.seed;
  cfg.n_inits = a.inits;
  const msc::CompletionResult res = msc::complete_missing_rows(y, msc::read_matrix_csv(a.dict), missing, cfg);

  msc::Matrix completed = y;
  for (std::size_t i = 0; i < missing.size(); ++i) completed.row(missing[i]) = res.missing_rows.row(i);
  fs::create_directories(a.out);
  const fs::path out(a.out);
  msc::write_matrix_csv((out / "completed.csv").string(), completed);
  msc::write_matrix_csv((out / "missing_rows.csv").string(), res.missing_rows);
  std::vector<std::string> extra{"observed_rel_residual = " + std::to_string(res.observed_rel_residual)};
  std::string dropped = "dropped_atoms =";
  for (std::size_t i = 0; i < res.dropped_atoms.size(); ++i)
    dropped += (i ? ", " : " ") + std::to_string(res.dropped_atoms[i]);
  extra.push_back(dropped);
  for (const auto& w : res.warnings) extra.push_back("warning = " + w);
  write_report(out / "report.txt", res.report, y.squaredNorm(), extra);
  std::fprintf(stderr, "dlra complete: %zu rows filled, observed relative residual %.6g\n", missing.size(),
               res.observed_rel_residual);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dictionary-based low-rank approximation"};
  app.require_subcommand(1);

  RunArgs r;
  auto* run = app.add_subcommand("run", "Fit a DLRA model");
  run->add_option("--model", r.model, "dmf, dnmf, dcpd or nndcpd")
      ->check(CLI::IsMember({"dmf", "dnmf", "dcpd", "nndcpd"}));
  run->add_option("--data", r.data, "Matrix CSV or tensor file")->required()->check(CLI::ExistingFile);
  run->add_option("--dict", r.dict, "Mode-0 dictionary CSV")->required()->check(CLI::ExistingFile);
  run->add_option("--dict2", r.dict2, "Mode-1 dictionary CSV (CPD kinds)")->check(CLI::ExistingFile);
  run->add_option("--rank", r.rank, "Rank")->required()->check(CLI::PositiveNumber);
  run->add_option("--k", r.k, "Mode-0 sparsity per column")->required()->check(CLI::PositiveNumber);
  run->add_option("--k2", r.k2, "Mode-1 sparsity per column (defaults to k)");
  run->add_option("--alpha", r.alpha, "Initial regularization ratio")->check(CLI::Range(0.0, 1.0));
  run->add_option("--tau", r.tau, "Tuner slack")->check(CLI::NonNegativeNumber);
  run->add_option("--iters", r.iters, "Outer iterations")->check(CLI::PositiveNumber);
  run->add_option("--method", r.method, "ao or ipalm")->check(CLI::IsMember({"ao", "ipalm"}));
  run->add_option("--mu", r.mu, "iPALM stepsize safeguard")->check(CLI::Range(1e-12, 1.0));
  run->add_option("--init", r.init, "random or lra")->check(CLI::IsMember({"random", "lra"}));
  run->add_option("--seed", r.seed, "Seed");
  run->add_option("--out", r.out, "Output directory")->required();

  CompleteArgs c;
  auto* complete = app.add_subcommand("complete", "Fill missing rows with a DMF model");
  complete->add_option("--data", c.data, "Y as CSV (missing rows may hold anything)")
      ->required()
      ->check(CLI::ExistingFile);
  complete->add_option("--mask", c.mask, "Missing row indices, one per line")->required()->check(CLI::ExistingFile);
  complete->add_option("--dict", c.dict, "Dictionary CSV over all rows")->required()->check(CLI::ExistingFile);
  complete->add_option("--rank", c.rank, "Rank")->required()->check(CLI::PositiveNumber);
  complete->add_option("--k", c.k, "Sparsity per column")->required()->check(CLI::PositiveNumber);
  complete->add_option("--alpha", c.alpha, "Initial regularization ratio")->check(CLI::Range(0.0, 1.0));
  complete->add_option("--tau", c.tau, "Tuner slack")->check(CLI::NonNegativeNumber);
  complete->add_option("--iters", c.iters, "Outer iterations")->check(CLI::PositiveNumber);
  complete->add_option("--seed", c.seed, "Seed");
  complete->add_option("--inits", c.inits, "Random initializations (best kept)")->check(CLI::PositiveNumber);
  complete->add_option("--out", c.out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_model(r);
    return run_complete(c);
  } catch (const std::exception& e) {
    std::cerr << "dlra: " << e.what() << "\n";
    return 1;
  }
}
