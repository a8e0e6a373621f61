// Windowed force statistics and the convergence criterion that decides when a
// quasi-steady wrench snapshot may be taken.
//
// An episode's vertical force is tiled into consecutive fixed-length windows
// (default 1 s, trailing partial window dropped). Convergence is declared at
// the first window index where the tick-to-tick change of every monitored
// statistic stays below a threshold for the required number of consecutive
// windows. Online (single-episode) detection monitors {window mean, window
// 2*std}; ensemble detection over many episodes monitors four statistics:
// mean of window means, its 95% CI half-width, mean of the per-episode 2*std
// values, and their spread.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pih/accommodation.hpp"
#include "pih/core.hpp"

namespace pih {

struct WindowStats {
  std::size_t window_index = 0;
  double mean_fz = 0.0;
  double two_sigma_fz = 0.0;  // 2 * sample std (ddof = 1)
};

// Exact per-window sample mean and 2*std of a force series; the trailing
// partial window is dropped. Throws InsufficientDataError when fewer than two
// full windows fit.
std::vector<WindowStats> window_statistics(std::span<const double> fz,
                                           double dt, double window_len);
std::vector<WindowStats> window_statistics(const EpisodeLog& log,
                                           double window_len);

struct EnsembleStats {
  std::size_t n_episodes = 0;
  // Per window index, aligned across the vectors below (episodes truncated to
  // the shortest window count).
  std::vector<double> mean_of_means;
  std::vector<double> ci_half;         // 1.96 * std(means) / sqrt(n)
  std::vector<double> mean_two_sigma;  // E over episodes of the 2*std values
  std::vector<double> std_two_sigma;   // spread of the 2*std values (ddof=1)
  // Pooled over every tick of the window across all episodes.
  std::vector<double> pooled_mean;
  std::vector<double> pooled_two_sigma;

  // The four monitored series, in a fixed order.
  std::vector<std::vector<double>> statistic_series() const {
    return {mean_of_means, ci_half, mean_two_sigma, std_two_sigma};
  }
};

// Requires at least two episodes. Window counts are truncated to the shortest
// episode.
EnsembleStats ensemble_statistics(const std::vector<EpisodeLog>& logs,
                                  double window_len);

struct ConvergenceCriterionConfig {
  double eta_th = 0.1;  // N; threshold on the per-window statistic change
  int consecutive_required = 2;
  double window_len = 1.0;  // s

  void validate() const;
};

// Returns the first window index k such that |X_j - X_{j-1}| < eta_th holds
// for every series at j = k - consecutive_required + 1, ..., k; nullopt when
// the condition is never met (including series too short to evaluate).
std::optional<std::size_t> detect_convergence(
    const std::vector<std::vector<double>>& statistic_series,
    const ConvergenceCriterionConfig& cfg);

// Single-episode online mode: the criterion applied to {mean, 2*std} of the
// force series itself.
std::optional<std::size_t> detect_convergence_online(
    std::span<const double> fz, double dt,
    const ConvergenceCriterionConfig& cfg);

}  // namespace pih
