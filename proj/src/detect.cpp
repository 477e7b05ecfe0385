#include "fedcov/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedcov {

namespace {

void check_updates(const std::vector<ParamVector>& updates) {
  if (updates.size() < 2)
    throw ConfigError("detector needs at least 2 client updates");
  for (const auto& u : updates)
    if (u.spec != updates.front().spec)
      throw ConfigError("detector: mixed model specs");
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

L2Report l2_report(const std::vector<ParamVector>& updates,
                   const DetectorOptions& opts) {
  check_updates(updates);
  L2Report report;
  report.norms.reserve(updates.size());
  for (const auto& u : updates) report.norms.push_back(u.values.norm());
  const double mu = mean_of(report.norms);
  const double sd = stddev_of(report.norms, mu);
  report.z_scores.reserve(updates.size());
  for (std::size_t i = 0; i < report.norms.size(); ++i) {
    const double z = sd > 0.0 ? (report.norms[i] - mu) / sd : 0.0;
    report.z_scores.push_back(z);
    if (std::abs(z) > opts.z_threshold)
      report.flagged.push_back(
          {static_cast<int>(i), "l2 z-score " + std::to_string(z)});
  }
  return report;
}

SimilarityReport cosine_report(const std::vector<ParamVector>& updates,
                               const DetectorOptions& opts) {
  check_updates(updates);
  const auto m = static_cast<Index>(updates.size());

  std::vector<double> norms(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    norms[i] = updates[i].values.norm();
    if (norms[i] == 0.0)
      throw ConfigError("cosine_report: zero-norm update has no direction");
  }

  SimilarityReport report;
  report.l2_norms = norms;
  report.pairwise_cosine = Matrix::Identity(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) {
      const double v = updates[static_cast<std::size_t>(i)].values.dot(
                           updates[static_cast<std::size_t>(j)].values) /
                       (norms[static_cast<std::size_t>(i)] *
                        norms[static_cast<std::size_t>(j)]);
      report.pairwise_cosine(i, j) = v;
      report.pairwise_cosine(j, i) = v;
    }

  report.mean_similarity.resize(updates.size());
  for (Index i = 0; i < m; ++i) {
    double s = 0.0;
    for (Index j = 0; j < m; ++j)
      if (j != i) s += report.pairwise_cosine(i, j);
    report.mean_similarity[static_cast<std::size_t>(i)] =
        s / static_cast<double>(m - 1);
  }

  // Leave-one-out: client i is judged against the similarity distribution of
  // pairs that do not involve i at all.
  if (m >= 3) {
    for (Index i = 0; i < m; ++i) {
      std::vector<double> others;
      for (Index a = 0; a < m; ++a)
        for (Index b = a + 1; b < m; ++b)
          if (a != i && b != i)
            others.push_back(report.pairwise_cosine(a, b));
      const double mu = mean_of(others);
      const double sd = stddev_of(others, mu);
      if (report.mean_similarity[static_cast<std::size_t>(i)] <
          mu - opts.z_threshold * sd)
        report.flagged.push_back({static_cast<int>(i), "low cosine similarity"});
    }
  }
  return report;
}

AccuracyReport accuracy_report(const std::vector<ParamVector>& updates,
                               const Dataset& validation,
                               const DetectorOptions& opts) {
  check_updates(updates);
  if (validation.num_samples() == 0)
    throw ConfigError("accuracy_report: empty validation set");
  AccuracyReport report;
  report.accuracies.reserve(updates.size());
  for (const auto& u : updates)
    report.accuracies.push_back(evaluate(u, validation));
  const double mu = mean_of(report.accuracies);
  const double sd = stddev_of(report.accuracies, mu);
  for (std::size_t i = 0; i < report.accuracies.size(); ++i)
    if (report.accuracies[i] < mu - opts.z_threshold * sd)
      report.flagged.push_back(
          {static_cast<int>(i),
           "low validation accuracy " + std::to_string(report.accuracies[i])});
  return report;
}

WeightTrace WeightTrace::all_positions(Index parameter_count, int num_clients) {
  WeightTrace trace;
  trace.positions.resize(static_cast<std::size_t>(parameter_count));
  for (Index i = 0; i < parameter_count; ++i)
    trace.positions[static_cast<std::size_t>(i)] = i;
  trace.series.resize(static_cast<std::size_t>(num_clients));
  return trace;
}

void WeightTrace::record_round(const std::vector<ParamVector>& submitted) {
  if (submitted.size() != series.size())
    throw ConfigError("WeightTrace: client count changed between rounds");
  const auto cols = static_cast<Index>(positions.size());
  for (std::size_t c = 0; c < submitted.size(); ++c) {
    Matrix& s = series[c];
    if (s.rows() == rounds_recorded) {
      // Grow geometrically; rounds_recorded tracks the filled prefix.
      Matrix grown(std::max<Index>(16, s.rows() * 2), cols);
      grown.topRows(s.rows()) = s;
      s = std::move(grown);
    }
    for (Index j = 0; j < cols; ++j)
      s(rounds_recorded, j) =
          submitted[c].values[positions[static_cast<std::size_t>(j)]];
  }
  ++rounds_recorded;
}

RecorderReport recorder_report(const WeightTrace& trace,
                               const std::vector<int>& cycle_hypotheses,
                               const DetectorOptions& opts) {
  if (cycle_hypotheses.empty())
    throw ConfigError("recorder_report: no cycle hypotheses");
  int max_h = 0;
  for (int h : cycle_hypotheses) {
    if (h < 2)
      throw ConfigError("recorder_report: cycle hypotheses must be >= 2");
    max_h = std::max(max_h, h);
  }
  if (trace.rounds_recorded < 2 * max_h)
    throw ConfigError(
        "recorder_report: trace must cover at least two full cycles of the "
        "largest hypothesis");

  RecorderReport report;
  const auto num_positions = static_cast<Index>(trace.positions.size());
  for (std::size_t c = 0; c < trace.series.size(); ++c) {
    const Matrix& s = trace.series[c];
    for (Index j = 0; j < num_positions; ++j) {
      double best = 0.0;
      int best_h = cycle_hypotheses.front();
      for (int h : cycle_hypotheses) {
        const int cycles = trace.rounds_recorded / h;
        int pinned = 0;
        for (int k = 0; k < cycles; ++k) {
          double lo = std::numeric_limits<double>::infinity();
          double hi = 0.0;
          bool pos_seen = false, neg_seen = false;
          for (int r = k * h; r < (k + 1) * h; ++r) {
            const double v = s(r, j);
            const double mag = std::abs(v);
            lo = std::min(lo, mag);
            hi = std::max(hi, mag);
            if (v > 0.0) pos_seen = true;
            if (v < 0.0) neg_seen = true;
          }
          if (hi - lo <= 1e-9 && !(pos_seen && neg_seen)) ++pinned;
        }
        const double score =
            cycles > 0 ? static_cast<double>(pinned) / cycles : 0.0;
        if (score > best) {
          best = score;
          best_h = h;
        }
      }
      report.ranked.push_back(
          {static_cast<int>(c), trace.positions[static_cast<std::size_t>(j)],
           best, best_h});
    }
  }

  std::stable_sort(report.ranked.begin(), report.ranked.end(),
                   [](const RecorderFinding& a, const RecorderFinding& b) {
                     return a.score > b.score;
                   });
  for (const auto& f : report.ranked)
    if (f.score > opts.recorder_threshold) report.flagged.push_back(f);
  return report;
}

}  // namespace fedcov
