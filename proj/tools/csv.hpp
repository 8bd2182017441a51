#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "smcf/coupling.hpp"

namespace smcf::cli {

inline constexpr std::string_view kCsvHeader =
    "experiment,epsilon,g0,g1,N,k,q,p,scheme,replicates,seed,value,stderr,bound";

// One output row; empty optionals become empty CSV fields.
struct ResultRecord {
  std::string experiment;
  std::optional<double> epsilon;
  std::optional<double> g0;
  std::optional<double> g1;
  std::optional<int> n_particles;
  std::optional<int> k;
  std::optional<int> q;
  std::optional<int> p_norm;
  std::optional<CouplingScheme> scheme;
  std::optional<std::int64_t> replicates;
  std::optional<std::uint64_t> seed;
  double value = 0.0;
  std::optional<double> std_error;
  std::optional<double> bound;
};

// Shortest decimal form with 17 significant digits (round-trip exact).
std::string format_value(double v);

// Header plus one line per record, LF line endings throughout.
std::string to_csv(std::span<const ResultRecord> records);

}  // namespace smcf::cli
