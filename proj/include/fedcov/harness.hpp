#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedcov/detect.hpp"
#include "fedcov/sim.hpp"

namespace fedcov {

/// Where a scenario's payload comes from.
struct PayloadSource {
  enum class Type { None, InlineBits, InlineText, TextFile, PbmFile };
  Type type = Type::None;
  std::string inline_value;        // bits as "0101..." or literal text
  std::filesystem::path path;     // for file-backed payloads
};

struct DetectorToggles {
  bool l2 = false;
  bool cosine = false;
  bool accuracy = false;
  bool recorder = false;
  DetectorOptions options;
  std::vector<int> recorder_hypotheses;
};

/// A fully described experiment: federated setup, channel secret, payload,
/// defense toggles and output location.
struct Scenario {
  std::string name = "scenario";
  FedConfig fed;
  // Channel knobs; concrete CovertConfig is derived per run.
  bool covert_enabled = true;
  Index num_positions = 0;
  int cycle_rounds = 20;
  int warmup_rounds = 0;
  std::uint64_t shared_seed = 0;
  FactorPolicy factor_policy;
  ThresholdPolicy threshold_policy = ThresholdPolicy::Zero;
  PayloadSource payload;
  DetectorToggles detectors;
  bool best_effort = false;  // report BER without treating mismatch as failure
  std::filesystem::path output_dir = "out";
};

/// Load a scenario JSON file; relative payload paths resolve against the
/// scenario file's directory.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir);

/// Materialize the payload bits and the derived covert config.
Bitstream load_payload(const Scenario& scenario);
CovertConfig build_covert_config(const Scenario& scenario,
                                 Index payload_bits);

/// Outcome of one scenario run plus the artifact paths written.
struct RunArtifacts {
  std::filesystem::path output_dir;
  std::filesystem::path rounds_csv;
  std::filesystem::path observations_csv;
  std::filesystem::path summary_json;
  std::optional<std::filesystem::path> decoded_payload;
  std::optional<std::filesystem::path> detection_csv;
  std::optional<std::filesystem::path> detection_json;

  // Headline numbers (also serialized into summary.json).
  std::optional<double> ber;
  std::optional<int> first_success_round;
  double final_global_accuracy = 0.0;
  double mean_cycle_amplitude = 0.0;
  std::map<std::string, double> sender_flag_rates;  // detector -> rate
  Bitstream sent;
  Bitstream received;
  std::vector<RoundReport> reports;
  std::vector<ClientRole> roles;
  bool decode_success = false;
};

/// Execute a scenario end to end and write all artifacts.
RunArtifacts run_scenario(const Scenario& scenario);

enum class SweepAxis { Clients, AttackerRatio, Noise };

struct SweepPoint {
  double value = 0.0;
  std::vector<RunArtifacts> runs;  // one per seed
  double mean_final_accuracy = 0.0;
  double mean_ber = 0.0;
  double mean_cycle_amplitude = 0.0;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
  std::filesystem::path summary_json;
};

/// One run per axis value (times `seeds` master seeds), shared seeds
/// otherwise; writes a sweep summary with the comparison series.
SweepResult run_sweep(const Scenario& base, SweepAxis axis,
                      const std::vector<double>& values, int seeds = 1);

/// Bit error rate between sent and received payloads of equal meaning;
/// compares min(|sent|,|received|) prefix and counts missing bits as errors.
double bit_error_rate(const Bitstream& sent, const Bitstream& received);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Format a double with 9 significant digits (fixed policy for all artifact
/// and CLI numbers). Always keeps a decimal point for floating values.
std::string format_real(double v);

/// Round to 9 significant digits (value actually stored in JSON artifacts).
double round9(double v);

}  // namespace fedcov
