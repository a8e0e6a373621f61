#include "pih/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace pih {

namespace {

double sample_mean(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Two-pass sample std with ddof = 1.
double sample_std(std::span<const double> xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void ConvergenceCriterionConfig::validate() const {
  if (!(eta_th > 0.0)) throw InvalidSpecError("eta_th must be > 0");
  if (consecutive_required < 1) {
    throw InvalidSpecError("consecutive_required must be >= 1");
  }
  if (!(window_len > 0.0)) throw InvalidSpecError("window_len must be > 0");
}

std::vector<WindowStats> window_statistics(std::span<const double> fz,
                                           double dt, double window_len) {
  if (!(dt > 0.0) || !(window_len > 0.0)) {
    throw InvalidSpecError("dt and window_len must be > 0");
  }
  const auto ticks_per_window =
      static_cast<std::size_t>(std::llround(window_len / dt));
  if (ticks_per_window < 2) {
    throw InvalidSpecError("window shorter than two ticks");
  }
  const std::size_t n_windows = fz.size() / ticks_per_window;
  if (n_windows < 1) {
    throw InsufficientDataError("episode shorter than one full window");
  }
  std::vector<WindowStats> stats;
  stats.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    const auto slice = fz.subspan(w * ticks_per_window, ticks_per_window);
    const double mean = sample_mean(slice);
    stats.push_back({w, mean, 2.0 * sample_std(slice, mean)});
  }
  return stats;
}

std::vector<WindowStats> window_statistics(const EpisodeLog& log,
                                           double window_len) {
  const auto fz = log.fz_series();
  return window_statistics(fz, log.meta.dt, window_len);
}

EnsembleStats ensemble_statistics(const std::vector<EpisodeLog>& logs,
                                  double window_len) {
  if (logs.size() < 2) {
    throw InsufficientDataError("ensemble statistics need >= 2 episodes");
  }
  std::vector<std::vector<WindowStats>> per_episode;
  per_episode.reserve(logs.size());
  std::size_t n_windows = SIZE_MAX;
  for (const auto& log : logs) {
    per_episode.push_back(window_statistics(log, window_len));
    n_windows = std::min(n_windows, per_episode.back().size());
  }

  const double n = static_cast<double>(logs.size());
  EnsembleStats out;
  out.n_episodes = logs.size();
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::vector<double> means, sigmas;
    means.reserve(logs.size());
    sigmas.reserve(logs.size());
    for (const auto& ep : per_episode) {
      means.push_back(ep[w].mean_fz);
      sigmas.push_back(ep[w].two_sigma_fz);
    }
    const double mm = sample_mean(means);
    const double ms = sample_mean(sigmas);
    out.mean_of_means.push_back(mm);
    out.ci_half.push_back(1.96 * sample_std(means, mm) / std::sqrt(n));
    out.mean_two_sigma.push_back(ms);
    out.std_two_sigma.push_back(sample_std(sigmas, ms));
  }

  // Pooled statistics treat every tick of window w across all episodes as one
  // sample set.
  const auto ticks_per_window =
      static_cast<std::size_t>(std::llround(window_len / logs[0].meta.dt));
  for (std::size_t w = 0; w < n_windows; ++w) {
    std::vector<double> pool;
    pool.reserve(logs.size() * ticks_per_window);
    for (const auto& log : logs) {
      for (std::size_t i = 0; i < ticks_per_window; ++i) {
        pool.push_back(log.records[w * ticks_per_window + i].wrench.fz);
      }
    }
    const double pm = sample_mean(pool);
    out.pooled_mean.push_back(pm);
    out.pooled_two_sigma.push_back(2.0 * sample_std(pool, pm));
  }
  return out;
}

std::optional<std::size_t> detect_convergence(
    const std::vector<std::vector<double>>& statistic_series,
    const ConvergenceCriterionConfig& cfg) {
  cfg.validate();
  if (statistic_series.empty()) return std::nullopt;
  std::size_t n = statistic_series.front().size();
  for (const auto& s : statistic_series) n = std::min(n, s.size());

  const auto passes = [&](std::size_t j) {
    for (const auto& s : statistic_series) {
      if (!(std::abs(s[j] - s[j - 1]) < cfg.eta_th)) return false;
    }
    return true;
  };

  const auto c = static_cast<std::size_t>(cfg.consecutive_required);
  for (std::size_t k = c; k < n; ++k) {
    bool all = true;
    for (std::size_t j = k - c + 1; j <= k; ++j) {
      if (!passes(j)) {
        all = false;
        break;
      }
    }
    if (all) return k;
  }
  return std::nullopt;
}

std::optional<std::size_t> detect_convergence_online(
    std::span<const double> fz, double dt,
    const ConvergenceCriterionConfig& cfg) {
  std::vector<WindowStats> stats;
  try {
    stats = window_statistics(fz, dt, cfg.window_len);
  } catch (const InsufficientDataError&) {
    return std::nullopt;
  }
  std::vector<double> means, sigmas;
  means.reserve(stats.size());
  sigmas.reserve(stats.size());
  for (const auto& s : stats) {
    means.push_back(s.mean_fz);
    sigmas.push_back(s.two_sigma_fz);
  }
  return detect_convergence({means, sigmas}, cfg);
}

}  // namespace pih
