#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace esqpt {

/// Effective settings of one batch job after merging the config file and flags.
struct JobConfig {
  std::string command;
  double beta0p = 1.4142135623730951;
  std::optional<double> lambda;  ///< single value; otherwise the range below
  double lambda_start = 0.0;
  double lambda_stop = 3.2;
  double lambda_step = 0.01;
  int n = 50;
  std::uint64_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
  int e_bins = 300;
  double e_min = 0.0;
  double e_max = 3.0;
  std::string n_gamma = "0,2,4";
  double width = 0.05;
  double osc_c = 0.5;
  double sigma_max = 0.05;
  int beta_points = 401;
  std::string cache_dir;
  std::string output;
  std::string format = "csv";
  int threads = 0;

  /// The single lambda or the inclusive range; throws DomainError for empty ranges.
  std::vector<double> lambda_grid() const;
  std::vector<int> n_gamma_list() const;
};

/// Exit codes: 0 success, 2 domain error, 3 numerical failure, 64 usage, 74 unwritable output.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace esqpt
