#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fedcov/covert.hpp"
#include "fedcov/model.hpp"

namespace fedcov {

enum class ClientRole { Benign, Sender, Receiver };

/// Whose submitted update the server perturbs when the noise defense is on.
enum class NoiseScope { AllClients, SenderOnly };

struct DataOptions {
  Index samples_per_class = 50;
  double cluster_spread = 0.5;
  Index validation_samples_per_class = 20;
};

struct FedConfig {
  int num_clients = 20;
  int total_rounds = 100;           // T
  double attacker_ratio = 0.0;      // fraction of clients acting as senders
  std::optional<int> num_senders;   // explicit override of the ratio
  double noise_level = 0.0;         // N_l in [0,1]
  NoiseScope noise_scope = NoiseScope::AllClients;
  ModelSpec model;
  TrainOptions training;
  DataOptions data;
  std::uint64_t master_seed = 1;

  int sender_count() const;
  void validate() const;
};

/// Per-round metrics over the submitted (post-noise) parameter vectors.
struct RoundReport {
  int round_index = 0;
  double global_accuracy = 0.0;
  std::vector<double> local_accuracies;
  std::vector<double> l2_norms;
  Matrix cosine_matrix;
  double applied_noise = 0.0;
};

struct ClientState {
  int id = 0;
  ClientRole role = ClientRole::Benign;
  Dataset shard;
  // Factor held constant across a cycle; refreshed on each cycle's first round.
  std::optional<FactorValue> cycle_factor;
};

/// Coordinate-wise mean with uniform weights. Rejects empty input, spec
/// mismatches and non-finite values.
ParamVector fed_avg(const std::vector<ParamVector>& client_params);

/// Server noise defense: (1-N_l)*w + N_l*g with g zero-mean Gaussian scaled
/// to the sample standard deviation of w. N_l=0 returns w untouched.
ParamVector apply_noise(const ParamVector& params, double noise_level,
                        std::uint64_t seed);

struct RoundResult {
  ParamVector new_global;
  RoundReport report;
  std::vector<ParamVector> submitted;  // post-noise, one per client
};

/// Training and validation drawn from one seeded distribution: identical
/// class means, disjoint samples.
struct DataSplit {
  Dataset train;
  Dataset validation;
};
DataSplit make_data_split(const FedConfig& config);

/// One federated round: local behaviour per role, optional server noise,
/// FedAvg, observation recording. Appends to `log` when it is non-null and
/// covert positions are configured.
RoundResult run_round(const ParamVector& global,
                      std::vector<ClientState>& clients, int round_index,
                      const FedConfig& config, const CovertConfig& covert,
                      const Bitstream& message, const Dataset& validation,
                      ObservationLog* log);

struct SimulationResult {
  std::vector<RoundReport> reports;
  Bitstream received;
  ObservationLog observations;
  std::vector<ClientRole> roles;
  ParamVector final_global;
};

/// Called after every aggregated round; used by the harness to collect
/// traces, per-round decodes and CSV rows without re-running anything.
using RoundCallback =
    std::function<void(int round_index, const RoundResult& result,
                       const ObservationLog& log)>;

/// Assign roles for the configured sender count: senders occupy the lowest
/// client ids, the receiver is the last client when it is not a sender.
std::vector<ClientRole> assign_roles(const FedConfig& config,
                                     bool covert_active);

/// Full run: dataset generation and IID partition, T rounds, final decode.
/// Rejects payloads exceeding capacity(T - warmup, |positions|, n) up front.
SimulationResult run_simulation(const FedConfig& config,
                                const CovertConfig& covert,
                                const Bitstream& message,
                                const RoundCallback& on_round = {});

}  // namespace fedcov
