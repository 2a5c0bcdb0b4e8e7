#include <CLI11.hpp>
#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "coreset/artifact.hpp"
#include "coreset/csv.hpp"
#include "coreset/lvm.hpp"
#include "coreset/regression.hpp"

namespace {

using coreset::numerics::Index;
using coreset::numerics::Matrix;
using coreset::numerics::Vector;

constexpr int kExitInputError = 2;
constexpr int kExitNumericalError = 3;

void apply_thread_cap() {
  if (const char* cap = std::getenv("EXACT_CORESET_THREADS")) {
    const int threads = std::atoi(cap);
    if (threads >= 1) Eigen::setNbThreads(threads);
  }
}

double wall_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

struct Options {
  std::string input;
  std::string output;
  std::string artifact;
  double lambda = 0.0;
  int p = 2;
  Index k = 0;
  Index label_col_raw = -1;  // -1: use the last column
  std::uint64_t seed = 0;
  Index clusters_raw = -1;  // -1: use the default cluster count
  int query_count = 100;
  std::vector<double> lambdas;

  std::optional<Index> label_col() const {
    return label_col_raw >= 0 ? std::optional<Index>(label_col_raw) : std::nullopt;
  }
  std::optional<Index> clusters() const {
    return clusters_raw >= 0 ? std::optional<Index>(clusters_raw) : std::nullopt;
  }
};

int run_regression(const Options& opt, int p) {
  const coreset::io::LabeledData data =
      coreset::io::split_label(coreset::io::load_csv(opt.input), opt.label_col());
  const coreset::regression::RegressionProblem prob{data.x, data.y, opt.lambda, p};

  const coreset::regression::RegressionCoreset core = coreset::regression::build_coreset(
      prob, coreset::kernel::RegularizerForm::sign_diagonal, opt.clusters());

  const coreset::kernel::KernelMatrix km =
      coreset::kernel::build_regression_kernel(prob.x, prob.y, prob.lambda, p);
  const auto kernel_spectrum = coreset::numerics::thin_svd(km.rows);
  const auto data_spectrum = coreset::numerics::thin_svd(km.rows.topRows(prob.n()));

  coreset::io::CoresetArtifact artifact;
  artifact.indices = core.data_indices;
  artifact.weights.assign(core.data_weights.data(), core.data_weights.data() + core.data_weights.size());
  artifact.reg_diag = core.reg_diag;
  artifact.lambda = opt.lambda;
  artifact.p = p;
  artifact.n = prob.n();
  artifact.d = prob.d();
  artifact.kernel_rank = coreset::numerics::effective_rank(kernel_spectrum);
  artifact.sd_bound = coreset::numerics::statistical_dimension(data_spectrum, opt.lambda) + 1.0;
  artifact.selected_count = core.data_count();

  coreset::io::atomic_write(opt.output, coreset::io::to_json(artifact));
  return 0;
}

int run_lvm(const Options& opt) {
  const coreset::io::CsvTable table = coreset::io::load_csv(opt.input);
  const coreset::lvm::MomentModel model{table.values, opt.k};
  const coreset::lvm::WhitenedTensorKernel kernel = coreset::lvm::build_lvm_kernel(model);
  const coreset::caratheodory::CoresetSelection sel = coreset::lvm::lvm_coreset(kernel, opt.clusters());

  const auto spectrum = coreset::numerics::thin_svd(kernel.rows);
  const Index rank = coreset::numerics::effective_rank(spectrum);

  coreset::io::CoresetArtifact artifact;
  artifact.indices = sel.indices;
  artifact.weights.assign(sel.weights.data(), sel.weights.data() + sel.weights.size());
  artifact.lambda = 0.0;
  artifact.k = opt.k;
  artifact.n = model.n();
  artifact.d = model.d();
  artifact.kernel_rank = rank;
  artifact.sd_bound = static_cast<double>(rank) + 1.0;
  artifact.selected_count = sel.size();

  coreset::io::atomic_write(opt.output, coreset::io::to_json(artifact));
  return 0;
}

int verify_regression(const Options& opt, const coreset::io::CoresetArtifact& artifact) {
  const auto start = std::chrono::steady_clock::now();
  const coreset::io::LabeledData data =
      coreset::io::split_label(coreset::io::load_csv(opt.input), opt.label_col());
  if (data.x.rows() != artifact.n || data.x.cols() != artifact.d) {
    throw coreset::input_error("artifact was built from a dataset of different shape");
  }

  coreset::regression::RegressionCoreset core;
  core.lambda = artifact.lambda;
  core.p = *artifact.p;
  core.d = artifact.d;
  core.reg_diag = artifact.reg_diag;
  core.data_indices = artifact.indices;
  core.data_weights = Eigen::Map<const Vector>(artifact.weights.data(),
                                               static_cast<Index>(artifact.weights.size()));
  core.x_rows.resize(core.data_count(), artifact.d);
  core.y_vals.resize(core.data_count());
  for (Index i = 0; i < core.data_count(); ++i) {
    const Index sample = core.data_indices[static_cast<std::size_t>(i)];
    if (sample < 0 || sample >= artifact.n) {
      throw coreset::input_error("artifact index " + std::to_string(sample) + " out of range");
    }
    core.x_rows.row(i) = data.x.row(sample);
    core.y_vals(i) = data.y(sample);
  }
  const double build_ms = wall_ms_since(start);

  const coreset::regression::RegressionProblem prob{data.x, data.y, artifact.lambda, *artifact.p};
  coreset::regression::EquivalenceReport report =
      coreset::regression::verify_equivalence(prob, core, opt.query_count, opt.seed);
  report.build_wall_ms = build_ms;

  const std::string json = coreset::io::to_json(report);
  std::cout << json;
  if (!opt.output.empty()) coreset::io::atomic_write(opt.output, json);
  return report.max_rel_gap <= 1e-8 ? 0 : kExitNumericalError;
}

int verify_lvm(const Options& opt, const coreset::io::CoresetArtifact& artifact) {
  const auto start = std::chrono::steady_clock::now();
  const coreset::io::CsvTable table = coreset::io::load_csv(opt.input);
  if (table.values.rows() != artifact.n || table.values.cols() != artifact.d) {
    throw coreset::input_error("artifact was built from a dataset of different shape");
  }
  const coreset::lvm::MomentModel model{table.values, *artifact.k};
  const coreset::lvm::WhitenedTensorKernel kernel = coreset::lvm::build_lvm_kernel(model);

  coreset::caratheodory::CoresetSelection sel;
  sel.indices = artifact.indices;
  sel.weights =
      Eigen::Map<const Vector>(artifact.weights.data(), static_cast<Index>(artifact.weights.size()));
  for (Index idx : sel.indices) {
    if (idx < 0 || idx >= artifact.n) {
      throw coreset::input_error("artifact index " + std::to_string(idx) + " out of range");
    }
  }
  const double build_ms = wall_ms_since(start);

  const auto verify_start = std::chrono::steady_clock::now();
  const Vector full_t = coreset::lvm::whitened_tensor(kernel);
  const Vector core_t = coreset::lvm::whitened_tensor(kernel, sel);

  coreset::regression::EquivalenceReport report;
  report.num_queries = opt.query_count;
  report.full_rows = artifact.n;
  report.coreset_rows = sel.size();
  report.build_wall_ms = build_ms;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector q(kernel.k);
  for (int i = 0; i < opt.query_count; ++i) {
    for (Index j = 0; j < q.size(); ++j) q(j) = normal(rng);
    const Vector lifted = coreset::kernel::outer_power_vec(q, 3);
    const double full = full_t.dot(lifted);
    const double reduced = core_t.dot(lifted);
    const double gap = std::abs(full - reduced);
    report.max_abs_gap = std::max(report.max_abs_gap, gap);
    report.max_rel_gap = std::max(report.max_rel_gap, gap / (1.0 + std::abs(full)));
  }

  const auto full_eig = coreset::lvm::decompose_symmetric3(full_t, kernel.k, 10, 100, opt.seed);
  const auto core_eig = coreset::lvm::decompose_symmetric3(core_t, kernel.k, 10, 100, opt.seed);
  report.full_solution.resize(kernel.k);
  report.coreset_solution.resize(kernel.k);
  for (Index j = 0; j < kernel.k; ++j) {
    report.full_solution(j) = full_eig.pairs[static_cast<std::size_t>(j)].eigenvalue;
    report.coreset_solution(j) = core_eig.pairs[static_cast<std::size_t>(j)].eigenvalue;
    report.solution_gap =
        std::max(report.solution_gap, std::abs(report.full_solution(j) - report.coreset_solution(j)) /
                                          (1.0 + std::abs(report.full_solution(j))));
  }
  report.verify_wall_ms = wall_ms_since(verify_start);

  const std::string json = coreset::io::to_json(report);
  std::cout << json;
  if (!opt.output.empty()) coreset::io::atomic_write(opt.output, json);
  return report.max_rel_gap <= 1e-8 ? 0 : kExitNumericalError;
}

int run_verify(const Options& opt) {
  const coreset::io::CoresetArtifact artifact =
      coreset::io::artifact_from_json(coreset::io::read_file(opt.artifact));
  return artifact.is_regression() ? verify_regression(opt, artifact) : verify_lvm(opt, artifact);
}

int run_sweep(const Options& opt, int p) {
  const coreset::io::LabeledData data =
      coreset::io::split_label(coreset::io::load_csv(opt.input), opt.label_col());
  const coreset::regression::RegressionProblem prob{data.x, data.y, 0.0, p};
  const auto rows = coreset::regression::sweep_lambda(prob, opt.lambdas);

  std::string csv = "lambda,selected,sd_bound\n";
  for (const auto& row : rows) {
    csv += coreset::io::format_double(row.lambda);
    csv += ',';
    csv += std::to_string(row.data_rows_selected);
    csv += ',';
    csv += coreset::io::format_double(row.sd_bound);
    csv += '\n';
  }
  coreset::io::atomic_write(opt.output, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  Options opt;
  std::function<int()> command;

  CLI::App app{"Zero-loss coresets for regularized regression and latent variable moments"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_output) {
    sub->add_option("--input", opt.input, "input CSV path")->required();
    auto* out = sub->add_option("--output", opt.output, "output path");
    if (needs_output) out->required();
    sub->add_option("--seed", opt.seed, "RNG seed")->capture_default_str();
    sub->add_option("--clusters", opt.clusters_raw, "cluster count for the reduction")
        ->check(CLI::Range(Index{2}, std::numeric_limits<Index>::max()));
  };
  auto add_label = [&](CLI::App* sub) {
    sub->add_option("--label-col", opt.label_col_raw, "zero-based label column (default: last)")
        ->check(CLI::NonNegativeNumber);
  };

  CLI::App* ridge = app.add_subcommand("ridge", "build a ridge (p = 2) regression coreset");
  add_common(ridge, true);
  add_label(ridge);
  ridge->add_option("--lambda", opt.lambda, "regularization strength")->capture_default_str();
  ridge->callback([&] { command = [&] { return run_regression(opt, 2); }; });

  CLI::App* lpreg = app.add_subcommand("lpreg", "build an l_p-regularized regression coreset");
  add_common(lpreg, true);
  add_label(lpreg);
  lpreg->add_option("--lambda", opt.lambda, "regularization strength")->capture_default_str();
  lpreg->add_option("--p", opt.p, "even norm degree")->capture_default_str()->check(CLI::PositiveNumber);
  lpreg->callback([&] { command = [&] { return run_regression(opt, opt.p); }; });

  CLI::App* lvm = app.add_subcommand("lvm", "build a latent-variable moment coreset");
  add_common(lvm, true);
  lvm->add_option("--k", opt.k, "number of latent components")->required();
  lvm->callback([&] { command = [&] { return run_lvm(opt); }; });

  CLI::App* verify = app.add_subcommand("verify", "check an artifact against the original CSV");
  add_common(verify, false);
  add_label(verify);
  verify->add_option("--artifact", opt.artifact, "coreset artifact path")->required();
  verify->add_option("--query-count", opt.query_count, "number of random queries")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->callback([&] { command = [&] { return run_verify(opt); }; });

  CLI::App* sweep = app.add_subcommand("sweep", "coreset size vs lambda table");
  add_common(sweep, true);
  add_label(sweep);
  sweep->add_option("--lambda", opt.lambdas, "lambda grid (repeat or comma separate)")
      ->required()
      ->delimiter(',');
  sweep->add_option("--p", opt.p, "even norm degree")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->callback([&] { command = [&] { return run_sweep(opt, opt.p); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    return command();
  } catch (const coreset::input_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const coreset::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumericalError;
  }
}
