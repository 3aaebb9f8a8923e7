#include "pas/bench.hpp"
#include "pas/baselines.hpp"
#include "pas/error.hpp"

#include <algorithm>
#include <tuple>

namespace pas {

Suite parse_suite(const std::string& name)
{
  if (name == "closed")
    return Suite::Closed;
  if (name == "pda")
    return Suite::Pda;
  if (name == "noshift")
    return Suite::NoShift;
  throw Error(ErrorKind::ConfigError, "unknown suite '" + name + "'");
}

const char* to_string(Suite suite) noexcept
{
  switch (suite) {
    case Suite::Closed: return "closed";
    case Suite::Pda: return "pda";
    case Suite::NoShift: return "noshift";
  }
  return "unknown";
}

SynthConfig suite_config(Suite suite, std::uint64_t seed)
{
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.paired_target = false;
  cfg.thickness = 1.0;
  switch (suite) {
    case Suite::Closed:
      cfg.num_classes = 3;
      cfg.dim = 10;
      cfg.separation = 1.0;
      cfg.thickness = 0.2;
      cfg.rotation = 1.0;
      cfg.translation = 2.0;
      cfg.noise = 1.0;
      cfg.noise_dispersion = 0.8;
      break;
    case Suite::Pda:
      cfg.num_classes = 6;
      cfg.dim = 30;
      cfg.separation = 0.3;
      cfg.class_rank = 5;
      cfg.rotation = 1.0;
      cfg.translation = 2.0;
      cfg.noise = 0.3;
      cfg.pda_keep = std::vector<int>{ 0, 1, 2 };
      break;
    case Suite::NoShift:
      cfg.num_classes = 3;
      cfg.dim = 10;
      cfg.separation = 1.0;
      cfg.thickness = 0.2;
      break;
  }
  cfg.per_class = 100;
  return cfg;
}

PasConfig suite_pas_config(Suite suite)
{
  PasConfig config;
  config.dim = suite == Suite::Pda ? 10 : 1;
  return config;
}

SeedOutcome run_bench_seed(Suite suite, std::uint64_t seed)
{
  const auto [source, target] = synth_shifted_pair(suite_config(suite, seed));
  const std::vector<int>& truth = *target.true_labels;
  const PasConfig config = suite_pas_config(suite);

  SeedOutcome out;
  out.rows.push_back({ "1NN", seed, accuracy(nn1_classify(source, target.features), truth) });
  out.rows.push_back({ "PAS(c)", seed, accuracy(predict(pas_c(source, config.dim), target.features), truth) });
  ProgressiveResult fit = fit_progressive(source.features, source.labels, target.features, config, truth);
  out.rows.push_back({ "PAS", seed, accuracy(predict(fit.model, target.features), truth) });
  out.trace = std::move(fit.trace);
  return out;
}

std::string bench_rows_to_csv(std::vector<BenchRow> rows)
{
  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.method, a.seed) < std::tie(b.method, b.seed);
  });
  std::string out = "method,seed,accuracy\n";
  for (const BenchRow& r : rows)
    out += r.method + "," + std::to_string(r.seed) + "," + format_real(r.accuracy) + "\n";
  return out;
}

} // namespace pas
