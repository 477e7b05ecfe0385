#pragma once

#include <string>
#include <vector>

#include "fedcov/model.hpp"

namespace fedcov {

struct DetectorOptions {
  double z_threshold = 3.0;          // sigma cutoff for l2/cosine/accuracy flags
  double recorder_threshold = 0.5;   // score above which a position is flagged
};

struct ClientFlag {
  int client_id = 0;
  std::string reason;
};

/// L2 norms of the submitted vectors with per-round z-scores.
struct L2Report {
  std::vector<double> norms;
  std::vector<double> z_scores;
  std::vector<ClientFlag> flagged;
};

/// Pairwise cosine matrix plus leave-one-out outlier flags.
struct SimilarityReport {
  int round_index = 0;
  std::vector<double> l2_norms;
  Matrix pairwise_cosine;
  std::vector<double> mean_similarity;  // mean cosine to the other clients
  std::vector<ClientFlag> flagged;
};

struct AccuracyReport {
  std::vector<double> accuracies;
  std::vector<ClientFlag> flagged;
};

/// Longitudinal record of every client's submitted values: one row per round,
/// one column per recorded position (defaults to all parameters).
struct WeightTrace {
  std::vector<Index> positions;   // recorded flat indices
  std::vector<Matrix> series;     // per client: rounds x positions
  int rounds_recorded = 0;

  static WeightTrace all_positions(Index parameter_count, int num_clients);

  void record_round(const std::vector<ParamVector>& submitted);
};

struct RecorderFinding {
  int client_id = 0;
  Index position = 0;    // flat parameter index
  double score = 0.0;    // 1.0 = pinned to a signed constant on full cycles
  int best_hypothesis = 0;
};

struct RecorderReport {
  std::vector<RecorderFinding> ranked;   // descending score
  std::vector<RecorderFinding> flagged;  // score above threshold
};

L2Report l2_report(const std::vector<ParamVector>& updates,
                   const DetectorOptions& opts = {});

SimilarityReport cosine_report(const std::vector<ParamVector>& updates,
                               const DetectorOptions& opts = {});

AccuracyReport accuracy_report(const std::vector<ParamVector>& updates,
                               const Dataset& validation,
                               const DetectorOptions& opts = {});

/// Scores every (client, position) by how cleanly the submitted value is
/// pinned to a signed constant over hypothesized cycles: a cycle counts as
/// pinned when its magnitudes agree within 1e-9 and its signs never change;
/// the score is the fraction of pinned full cycles, maximized over the
/// hypothesis list. Hypotheses must be >= 2 rounds and the trace must cover
/// at least two full cycles of the largest one.
RecorderReport recorder_report(const WeightTrace& trace,
                               const std::vector<int>& cycle_hypotheses,
                               const DetectorOptions& opts = {});

}  // namespace fedcov
