#pragma once

#include "pas/core.hpp"
#include "pas/data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pas {

enum class Suite
{
  Closed,  // shifted 3-class closed-set problem
  Pda,     // 6 source classes, target keeps 3
  NoShift  // closed-set layout with the shift switched off
};

Suite parse_suite(const std::string& name);
const char* to_string(Suite suite) noexcept;

//! Synthetic problem for one seed of a suite.
SynthConfig suite_config(Suite suite, std::uint64_t seed);
//! Solver settings for a suite (subspace dimension differs between the
//! closed-set and PDA layouts).
PasConfig suite_pas_config(Suite suite);

struct BenchRow
{
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct SeedOutcome
{
  std::vector<BenchRow> rows; // 1NN, PAS(c), PAS
  FitTrace trace;
};

SeedOutcome run_bench_seed(Suite suite, std::uint64_t seed);

//! Sorted by (method, seed), header line included.
std::string bench_rows_to_csv(std::vector<BenchRow> rows);

} // namespace pas
