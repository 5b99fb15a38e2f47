#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strapsim/ingest/io.hpp"

namespace strapsim::eval {

struct ClassificationScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;  // unweighted mean over classes seen in truth or predictions
};

struct RegressionScores {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape;  // percent; absent when not requested
};

// Errors: LengthMismatch, TooShort on empty input.
ClassificationScores classification_scores(std::span<const std::string> pred,
                                           std::span<const std::string> truth);
// Errors: LengthMismatch, TooShort, ZeroTruthForMape when with_mape and a truth is 0.
RegressionScores regression_scores(std::span<const double> pred, std::span<const double> truth,
                                   bool with_mape = true);

// Named-map forms: accuracy/f1, or rmse/mae/mape.
std::map<std::string, double> error_metrics(std::span<const std::string> pred,
                                            std::span<const std::string> truth);
std::map<std::string, double> error_metrics(std::span<const double> pred,
                                            std::span<const double> truth);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> v);

double pearson(std::span<const double> a, std::span<const double> b);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided
};

struct SpearmanOptions {
  // Exact two-sided permutation p-value; only honoured for n <= 10.
  bool exact_permutation = false;
};

/// Pearson correlation of fractional ranks. The p-value uses
/// t = rho * sqrt((n - 2) / (1 - rho^2)) against Student-t(n - 2); |rho| = 1
/// gives p = 0. Errors: LengthMismatch, TooShort (n < 3), ConstantInput.
SpearmanResult spearman(std::span<const double> a, std::span<const double> b,
                        const SpearmanOptions& options = {});

inline constexpr std::size_t kMinOverlapPeriods = 12;

// Pearson correlation over the periods both series share; nullopt when fewer
// than `min_overlap` periods overlap or either side is constant there.
std::optional<double> return_correlation(const ingest::ReturnSeries& a, const ingest::ReturnSeries& b,
                                         std::size_t min_overlap = kMinOverlapPeriods);

}  // namespace strapsim::eval
