// Command-line front end: fit, predict, synth, bench, diagnose.
//
// Exit status: 0 on success, 3 on a feature-dimension mismatch, 2 on any
// other I/O, parse or configuration error. Outputs are staged in temporary
// files and renamed into place only once every output of a command is ready.

#include "pas/baselines.hpp"
#include "pas/bench.hpp"
#include "pas/core.hpp"
#include "pas/data.hpp"
#include "pas/diagnostics.hpp"
#include "pas/error.hpp"
#include "pas/model_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <unistd.h>
#include <utility>
#include <vector>

namespace fs = std::filesystem;

namespace {

//! Collects named outputs and publishes them together.
class OutputSet
{
public:
  void add(const fs::path& path, std::string bytes) { files_.emplace_back(path, std::move(bytes)); }

  void commit()
  {
    std::vector<std::pair<fs::path, fs::path>> staged;
    try {
      for (const auto& [path, bytes] : files_) {
        fs::path tmp = path;
        tmp += ".tmp." + std::to_string(::getpid());
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
          throw pas::Error(pas::ErrorKind::IoError, "cannot write " + path.string());
        staged.emplace_back(tmp, path);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out)
          throw pas::Error(pas::ErrorKind::IoError, "short write to " + path.string());
      }
      for (const auto& [tmp, path] : staged)
        fs::rename(tmp, path);
    } catch (...) {
      std::error_code ec;
      for (const auto& [tmp, path] : staged)
        fs::remove(tmp, ec);
      throw;
    }
  }

private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string trace_to_csv(const pas::FitTrace& trace)
{
  const bool with_acc = !trace.stages.empty() && trace.stages.front().pseudo_label_accuracy.has_value();
  std::string out = "stage,fraction,lambda,anchored,objective";
  out += with_acc ? ",pseudo_acc\n" : "\n";
  for (const pas::StageRecord& s : trace.stages) {
    out += std::to_string(s.stage) + "," + pas::format_real(s.fraction) + "," + pas::format_real(s.lambda) +
           "," + std::to_string(s.anchored) + "," + pas::format_real(s.objective);
    if (with_acc)
      out += "," + pas::format_real(s.pseudo_label_accuracy.value_or(0.0));
    out += "\n";
  }
  return out;
}

std::string raw_labels_to_text(const std::vector<int>& labels, const std::vector<std::int64_t>& class_values)
{
  std::string out;
  for (int y : labels) {
    out += std::to_string(class_values.at(static_cast<std::size_t>(y)));
    out.push_back('\n');
  }
  return out;
}

void require_same_dim(Eigen::Index expected, Eigen::Index got, const std::string& what)
{
  if (expected != got)
    throw pas::Error(pas::ErrorKind::DimensionMismatch, what + " has " + std::to_string(got) +
                                                          " columns, expected " + std::to_string(expected));
}

struct FitArgs
{
  std::string source, labels, target, out_model, trace_csv;
  std::optional<std::string> eval_labels;
  pas::PasConfig config;
};

int cmd_fit(const FitArgs& a)
{
  const pas::LabeledDataset source = pas::load_labeled(a.source, a.labels);
  const pas::FeatureMatrix target = pas::load_features(a.target);
  require_same_dim(source.features.cols(), target.cols(), "target");

  std::optional<std::vector<int>> eval;
  if (a.eval_labels) {
    eval = pas::apply_mapping(pas::load_raw_labels(*a.eval_labels), source.class_values);
    if (static_cast<Eigen::Index>(eval->size()) != target.rows())
      throw pas::Error(pas::ErrorKind::ParseError, "evaluation label count differs from target row count");
  }

  const pas::ProgressiveResult fit =
    pas::fit_progressive(source.features, source.labels, target, a.config, eval);

  OutputSet outputs;
  outputs.add(a.out_model, pas::serialize_model(fit.model, source.class_values));
  outputs.add(a.trace_csv, trace_to_csv(fit.trace));
  outputs.commit();

  const pas::StageRecord& last = fit.trace.stages.back();
  std::cout << "stages " << fit.trace.stages.size() << ", anchored " << last.anchored << "/" << target.rows();
  if (last.pseudo_label_accuracy)
    std::cout << ", pseudo-label accuracy " << pas::format_real(*last.pseudo_label_accuracy);
  std::cout << "\n";
  return 0;
}

struct PredictArgs
{
  std::string model, features, out;
};

int cmd_predict(const PredictArgs& a)
{
  const pas::ModelFile file = pas::load_model(a.model);
  const pas::FeatureMatrix X = pas::load_features(a.features);
  require_same_dim(file.model.feature_dim(), X.cols(), "features");
  OutputSet outputs;
  outputs.add(a.out, raw_labels_to_text(pas::predict(file.model, X), file.class_values));
  outputs.commit();
  return 0;
}

struct SynthArgs
{
  pas::SynthConfig cfg;
  std::string pda_keep;
  std::string out_prefix;
  std::string format = "csv";
  bool independent_target = false;
};

std::vector<int> parse_class_list(const std::string& text)
{
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string field = text.substr(start, comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(field, &used));
      if (used != field.size())
        throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw pas::Error(pas::ErrorKind::ConfigError, "bad class list entry '" + field + "'");
    }
    start = comma + 1;
  }
  return out;
}

int cmd_synth(SynthArgs a)
{
  if (!a.pda_keep.empty())
    a.cfg.pda_keep = parse_class_list(a.pda_keep);
  a.cfg.paired_target = !a.independent_target;
  const auto [source, target] = pas::synth_shifted_pair(a.cfg);

  const bool binary = a.format == "binary";
  const auto encode = [&](const pas::FeatureMatrix& X) {
    return binary ? pas::features_to_binary(X) : pas::features_to_csv(X);
  };
  const std::string ext = binary ? ".bin" : ".csv";
  OutputSet outputs;
  outputs.add(a.out_prefix + "source" + ext, encode(source.features));
  outputs.add(a.out_prefix + "source_labels.csv", pas::labels_to_text(source.labels.labels));
  outputs.add(a.out_prefix + "target" + ext, encode(target.features));
  outputs.add(a.out_prefix + "target_labels.csv", pas::labels_to_text(*target.true_labels));
  outputs.commit();
  return 0;
}

struct BenchArgs
{
  std::string suite = "closed";
  int seeds = 20;
  std::string out_csv;
};

unsigned thread_cap()
{
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PAS_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1)
      threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return threads;
}

int cmd_bench(const BenchArgs& a)
{
  if (a.seeds < 1)
    throw pas::Error(pas::ErrorKind::ConfigError, "--seeds must be >= 1");
  const pas::Suite suite = pas::parse_suite(a.suite);

  std::vector<std::vector<pas::BenchRow>> per_seed(static_cast<std::size_t>(a.seeds));
  std::vector<std::string> failures(per_seed.size());
  std::atomic<int> next{ 0 };
  const auto worker = [&]() {
    for (int s = next++; s < a.seeds; s = next++) {
      try {
        per_seed[static_cast<std::size_t>(s)] = pas::run_bench_seed(suite, static_cast<std::uint64_t>(s)).rows;
      } catch (const std::exception& e) {
        failures[static_cast<std::size_t>(s)] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(a.seeds));
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  for (const std::string& f : failures)
    if (!f.empty())
      throw pas::Error(pas::ErrorKind::ConfigError, f);

  std::vector<pas::BenchRow> rows;
  std::map<std::string, double> sums;
  for (const auto& seed_rows : per_seed)
    for (const pas::BenchRow& r : seed_rows) {
      rows.push_back(r);
      sums[r.method] += r.accuracy;
    }

  OutputSet outputs;
  outputs.add(a.out_csv, pas::bench_rows_to_csv(rows));
  outputs.commit();
  for (const auto& [method, sum] : sums)
    std::cout << method << " mean accuracy " << pas::format_real(sum / a.seeds) << "\n";
  return 0;
}

struct DiagnoseArgs
{
  std::string model, source, target, true_labels, out;
  std::optional<std::string> csv;
  double fraction = 0.05;
  pas::KliepOptions kliep;
};

int cmd_diagnose(const DiagnoseArgs& a)
{
  const pas::ModelFile file = pas::load_model(a.model);
  const pas::FeatureMatrix source = pas::load_features(a.source);
  const pas::FeatureMatrix target = pas::load_features(a.target);
  require_same_dim(file.model.feature_dim(), source.cols(), "source");
  require_same_dim(file.model.feature_dim(), target.cols(), "target");
  const std::vector<int> truth = pas::apply_mapping(pas::load_raw_labels(a.true_labels), file.class_values);
  if (static_cast<Eigen::Index>(truth.size()) != target.rows())
    throw pas::Error(pas::ErrorKind::ParseError, "true label count differs from target row count");

  const pas::KliepResult ratio = pas::kliep_fit(source, target, a.kliep);
  const pas::AnchoringReport report = pas::anchoring_report(file.model, target, truth, ratio.model, a.fraction);

  OutputSet outputs;
  outputs.add(a.out, pas::report_to_json(report));
  if (a.csv)
    outputs.add(*a.csv, pas::report_to_csv(report, a.kliep.seed, true));
  outputs.commit();
  std::cout << "top acc " << pas::format_real(report.top.accuracy) << " adr " << pas::format_real(report.top.adr)
            << ", bottom acc " << pas::format_real(report.bottom.accuracy) << " adr "
            << pas::format_real(report.bottom.adr) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Progressive adaptation of class subspaces for domain adaptation" };
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit subspaces on labelled source + unlabelled target");
  fit_cmd->add_option("--source", fit.source, "source features (CSV or PASM binary)")->required();
  fit_cmd->add_option("--labels", fit.labels, "source labels, one integer per line")->required();
  fit_cmd->add_option("--target", fit.target, "target features")->required();
  fit_cmd->add_option("--dim", fit.config.dim, "subspace dimension")->capture_default_str();
  fit_cmd->add_option("--step", fit.config.schedule_step, "anchored-fraction increment per stage")
    ->capture_default_str();
  fit_cmd->add_option("--inner-tol", fit.config.inner_tol, "relative objective tolerance")->capture_default_str();
  fit_cmd->add_option("--inner-max-iters", fit.config.inner_max_iters, "iteration cap per stage")
    ->capture_default_str();
  fit_cmd->add_option("--out-model", fit.out_model, "model JSON output")->required();
  fit_cmd->add_option("--trace-csv", fit.trace_csv, "per-stage trace CSV output")->required();
  fit_cmd->add_option("--eval-labels", fit.eval_labels, "true target labels for pseudo-label accuracy");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "label samples with a fitted model");
  pred_cmd->add_option("--model", pred.model)->required();
  pred_cmd->add_option("--features", pred.features)->required();
  pred_cmd->add_option("--out", pred.out)->required();

  SynthArgs syn;
  auto* syn_cmd = app.add_subcommand("synth", "generate a seeded shifted source/target pair");
  syn_cmd->add_option("--classes", syn.cfg.num_classes)->capture_default_str();
  syn_cmd->add_option("--dim", syn.cfg.dim)->capture_default_str();
  syn_cmd->add_option("--per-class", syn.cfg.per_class)->capture_default_str();
  syn_cmd->add_option("--rotation", syn.cfg.rotation, "radians")->capture_default_str();
  syn_cmd->add_option("--translation", syn.cfg.translation)->capture_default_str();
  syn_cmd->add_option("--noise", syn.cfg.noise)->capture_default_str();
  syn_cmd->add_option("--noise-dispersion", syn.cfg.noise_dispersion)->capture_default_str();
  syn_cmd->add_option("--separation", syn.cfg.separation)->capture_default_str();
  syn_cmd->add_option("--spread", syn.cfg.spread)->capture_default_str();
  syn_cmd->add_option("--thickness", syn.cfg.thickness)->capture_default_str();
  syn_cmd->add_option("--class-rank", syn.cfg.class_rank)->capture_default_str();
  syn_cmd->add_flag("--independent-target", syn.independent_target, "draw fresh target samples");
  syn_cmd->add_option("--pda-keep", syn.pda_keep, "comma-separated classes kept in the target");
  syn_cmd->add_option("--seed", syn.cfg.seed)->capture_default_str();
  syn_cmd->add_option("--format", syn.format)->check(CLI::IsMember({ "csv", "binary" }))->capture_default_str();
  syn_cmd->add_option("--out-prefix", syn.out_prefix)->required();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "1NN vs PAS(c) vs PAS on synthetic suites");
  bench_cmd->add_option("--suite", bench.suite, "closed | pda | noshift")->capture_default_str();
  bench_cmd->add_option("--seeds", bench.seeds)->capture_default_str();
  bench_cmd->add_option("--out-csv", bench.out_csv)->required();

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "accuracy and density ratio of top/bottom residual groups");
  diag_cmd->add_option("--model", diag.model)->required();
  diag_cmd->add_option("--source", diag.source)->required();
  diag_cmd->add_option("--target", diag.target)->required();
  diag_cmd->add_option("--true-labels", diag.true_labels)->required();
  diag_cmd->add_option("--fraction", diag.fraction)->capture_default_str();
  diag_cmd->add_option("--out", diag.out, "JSON report")->required();
  diag_cmd->add_option("--csv", diag.csv, "CSV rows in the bench layout plus adr");
  diag_cmd->add_option("--centers", diag.kliep.num_centers)->capture_default_str();
  diag_cmd->add_option("--bandwidth", diag.kliep.bandwidth, "kernel width (median heuristic if unset)");
  diag_cmd->add_option("--seed", diag.kliep.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit_cmd)
      return cmd_fit(fit);
    if (*pred_cmd)
      return cmd_predict(pred);
    if (*syn_cmd)
      return cmd_synth(syn);
    if (*bench_cmd)
      return cmd_bench(bench);
    if (*diag_cmd)
      return cmd_diagnose(diag);
  } catch (const pas::Error& e) {
    std::cerr << "pas: " << e.what() << "\n";
    return e.kind() == pas::ErrorKind::DimensionMismatch ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "pas: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
