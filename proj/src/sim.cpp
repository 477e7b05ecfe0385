#include "fedcov/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedcov/rng.hpp"

namespace fedcov {

int FedConfig::sender_count() const {
  if (num_senders) return *num_senders;
  return static_cast<int>(std::llround(attacker_ratio * num_clients));
}

void FedConfig::validate() const {
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (total_rounds < 1) throw ConfigError("total_rounds must be >= 1");
  if (attacker_ratio < 0.0 || attacker_ratio > 1.0)
    throw ConfigError("attacker_ratio must lie in [0,1]");
  if (noise_level < 0.0 || noise_level > 1.0)
    throw ConfigError("noise_level must lie in [0,1]");
  const int senders = sender_count();
  if (senders < 0 || senders > num_clients)
    throw ConfigError("sender count must lie in [0, num_clients]");
  model.validate();
}

ParamVector fed_avg(const std::vector<ParamVector>& client_params) {
  if (client_params.empty())
    throw ConfigError("fed_avg: empty client list");
  const ModelSpec spec = client_params.front().spec;
  Vector sum = Vector::Zero(client_params.front().size());
  for (const auto& p : client_params) {
    if (p.spec != spec) throw ConfigError("fed_avg: mixed model specs");
    if (!p.all_finite())
      throw ConfigError("fed_avg: non-finite values in client update");
    sum += p.values;
  }
  sum /= static_cast<double>(client_params.size());
  return ParamVector(spec, std::move(sum));
}

ParamVector apply_noise(const ParamVector& params, double noise_level,
                        std::uint64_t seed) {
  if (noise_level < 0.0 || noise_level > 1.0)
    throw ConfigError("apply_noise: noise_level must lie in [0,1]");
  if (noise_level == 0.0) return params;

  const Index n = params.size();
  double sd = 0.0;
  if (n > 1) {
    const double mean = params.values.mean();
    sd = std::sqrt((params.values.array() - mean).square().sum() /
                   static_cast<double>(n - 1));
  }
  SplitMix64 rng(seed);
  ParamVector out = params;
  for (Index i = 0; i < n; ++i)
    out.values[i] = (1.0 - noise_level) * params.values[i] +
                    noise_level * sd * rng.next_gaussian();
  return out;
}

DataSplit make_data_split(const FedConfig& config) {
  // One generator pass produces per-class blocks; the leading rows of each
  // class feed training, the rest are the server's hold-out set.
  const Index train_spc = config.data.samples_per_class;
  const Index val_spc = config.data.validation_samples_per_class;
  const Dataset full =
      generate_dataset(config.model, train_spc + val_spc,
                       config.data.cluster_spread,
                       derive_seed(config.master_seed, seed_stream::kData));

  const Index classes = config.model.num_classes;
  const Index dim = config.model.input_dim;
  DataSplit split;
  split.train.seed = full.seed;
  split.validation.seed = full.seed;
  split.train.features.resize(classes * train_spc, dim);
  split.train.labels.resize(classes * train_spc);
  split.validation.features.resize(classes * val_spc, dim);
  split.validation.labels.resize(classes * val_spc);
  for (Index k = 0; k < classes; ++k) {
    const Index base = k * (train_spc + val_spc);
    split.train.features.middleRows(k * train_spc, train_spc) =
        full.features.middleRows(base, train_spc);
    split.train.labels.segment(k * train_spc, train_spc) =
        full.labels.segment(base, train_spc);
    split.validation.features.middleRows(k * val_spc, val_spc) =
        full.features.middleRows(base + train_spc, val_spc);
    split.validation.labels.segment(k * val_spc, val_spc) =
        full.labels.segment(base + train_spc, val_spc);
  }
  return split;
}

std::vector<ClientRole> assign_roles(const FedConfig& config,
                                     bool covert_active) {
  std::vector<ClientRole> roles(static_cast<std::size_t>(config.num_clients),
                                ClientRole::Benign);
  if (!covert_active) return roles;
  const int senders = config.sender_count();
  for (int i = 0; i < senders; ++i)
    roles[static_cast<std::size_t>(i)] = ClientRole::Sender;
  // The receiver trains like a benign client; the role marks whose log it is.
  if (senders < config.num_clients)
    roles[static_cast<std::size_t>(config.num_clients - 1)] =
        ClientRole::Receiver;
  return roles;
}

namespace {

// Slice of the payload carried by cycle s: positions are reused every cycle.
std::vector<std::uint8_t> cycle_slice(const Bitstream& message,
                                      const CovertConfig& covert, int cycle) {
  const auto num_positions = static_cast<Index>(covert.positions.size());
  const Index begin = static_cast<Index>(cycle) * num_positions;
  const Index end = std::min({begin + num_positions, covert.payload_bits,
                              static_cast<Index>(message.bits.size())});
  std::vector<std::uint8_t> out;
  if (begin >= end) return out;
  out.assign(message.bits.begin() + begin, message.bits.begin() + end);
  return out;
}

Matrix pairwise_cosine(const std::vector<ParamVector>& updates) {
  const auto m = static_cast<Index>(updates.size());
  Matrix cos = Matrix::Identity(m, m);
  std::vector<double> norms(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i)
    norms[i] = updates[i].values.norm();
  for (Index i = 0; i < m; ++i) {
    for (Index j = i; j < m; ++j) {
      const double denom = norms[static_cast<std::size_t>(i)] *
                           norms[static_cast<std::size_t>(j)];
      const double v =
          denom > 0.0
              ? updates[static_cast<std::size_t>(i)].values.dot(
                    updates[static_cast<std::size_t>(j)].values) / denom
              : (i == j ? 1.0 : 0.0);
      cos(i, j) = v;
      cos(j, i) = v;
    }
  }
  return cos;
}

}  // namespace

RoundResult run_round(const ParamVector& global,
                      std::vector<ClientState>& clients, int round_index,
                      const FedConfig& config, const CovertConfig& covert,
                      const Bitstream& message, const Dataset& validation,
                      ObservationLog* log) {
  if (round_index < 0 || round_index >= config.total_rounds)
    throw ConfigError("run_round: round_index out of range");

  const auto num_positions = static_cast<Index>(covert.positions.size());
  std::vector<ParamVector> submitted;
  submitted.reserve(clients.size());

  for (auto& client : clients) {
    const std::uint64_t train_seed =
        derive_seed(config.master_seed, seed_stream::kTrain,
                    static_cast<std::uint64_t>(client.id),
                    static_cast<std::uint64_t>(round_index));
    ParamVector update =
        train_local(global, client.shard, config.training, train_seed);

    if (client.role == ClientRole::Sender && num_positions > 0) {
      if (round_index < covert.warmup_rounds) {
        update = zero_back(update, covert.positions);
        client.cycle_factor.reset();
      } else {
        const int offset = round_index - covert.warmup_rounds;
        const int cycle = offset / covert.cycle_rounds;
        if (cycle < covert.num_cycles) {
          // Factor is fixed for the whole cycle so every round of the cycle
          // writes the same magnitude.
          if (offset % covert.cycle_rounds == 0 || !client.cycle_factor)
            client.cycle_factor = compute_factor(
                update, covert.factor_policy,
                derive_seed(covert.shared_seed, seed_stream::kFactor,
                            static_cast<std::uint64_t>(client.id),
                            static_cast<std::uint64_t>(cycle)));
          update = embed_bits(update, cycle_slice(message, covert, cycle),
                              covert.positions, *client.cycle_factor);
        } else {
          client.cycle_factor.reset();  // transmission over; train normally
        }
      }
    }

    const bool noisy =
        config.noise_level > 0.0 &&
        (config.noise_scope == NoiseScope::AllClients ||
         client.role == ClientRole::Sender);
    if (noisy)
      update = apply_noise(update, config.noise_level,
                           derive_seed(config.master_seed, seed_stream::kNoise,
                                       static_cast<std::uint64_t>(client.id),
                                       static_cast<std::uint64_t>(round_index)));
    submitted.push_back(std::move(update));
  }

  RoundResult result;
  result.new_global = fed_avg(submitted);

  if (log && num_positions > 0) {
    Vector observed(num_positions);
    for (Index j = 0; j < num_positions; ++j)
      observed[j] = result.new_global.values[covert.positions[j]];
    log->append(round_index, std::move(observed));
  }

  RoundReport& report = result.report;
  report.round_index = round_index;
  report.applied_noise = config.noise_level;
  report.global_accuracy = evaluate(result.new_global, validation);
  report.local_accuracies.reserve(submitted.size());
  report.l2_norms.reserve(submitted.size());
  for (const auto& u : submitted) {
    report.local_accuracies.push_back(evaluate(u, validation));
    report.l2_norms.push_back(u.values.norm());
  }
  report.cosine_matrix = pairwise_cosine(submitted);

  result.submitted = std::move(submitted);
  return result;
}

SimulationResult run_simulation(const FedConfig& config,
                                const CovertConfig& covert,
                                const Bitstream& message,
                                const RoundCallback& on_round) {
  config.validate();
  covert.validate(config.model.parameter_count());
  if (static_cast<Index>(message.bits.size()) != covert.payload_bits)
    throw ConfigError("message length differs from covert payload_bits");

  if (covert.payload_bits > 0) {
    const int usable_rounds = config.total_rounds - covert.warmup_rounds;
    if (usable_rounds < 1 || covert.positions.empty())
      throw CapacityError("no usable rounds or positions for the payload");
    const Capacity cap =
        capacity(usable_rounds, static_cast<Index>(covert.positions.size()),
                 covert.cycle_rounds);
    if (covert.payload_bits > cap.total_bits)
      throw CapacityError("payload of " + std::to_string(covert.payload_bits) +
                          " bits exceeds channel capacity of " +
                          std::to_string(cap.total_bits) + " bits");
    if (covert.transmission_rounds() > config.total_rounds)
      throw CapacityError("warmup plus cycles exceed total rounds");
  }

  const bool covert_active = covert.payload_bits > 0 && config.sender_count() > 0;

  // One synthetic dataset, shuffled and split into equal IID shards.
  const DataSplit split = make_data_split(config);
  const Dataset& full = split.train;
  const Dataset& validation = split.validation;

  const Index n = full.num_samples();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  SplitMix64 shuffle_rng(derive_seed(config.master_seed, seed_stream::kPartition));
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(
        shuffle_rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  const auto roles = assign_roles(config, covert_active);
  std::vector<ClientState> clients;
  clients.reserve(static_cast<std::size_t>(config.num_clients));
  for (int c = 0; c < config.num_clients; ++c) {
    // Block partition of the shuffled sample order; sizes differ by <= 1.
    const Index lo = n * c / config.num_clients;
    const Index hi = n * (c + 1) / config.num_clients;
    Dataset shard;
    shard.seed = full.seed;
    shard.features.resize(hi - lo, full.input_dim());
    shard.labels.resize(hi - lo);
    for (Index r = lo; r < hi; ++r) {
      shard.features.row(r - lo) = full.features.row(perm[static_cast<std::size_t>(r)]);
      shard.labels[r - lo] = full.labels[perm[static_cast<std::size_t>(r)]];
    }
    clients.push_back(
        ClientState{c, roles[static_cast<std::size_t>(c)], std::move(shard), {}});
  }

  ParamVector global = init_params(
      config.model, derive_seed(config.master_seed, seed_stream::kInit));

  SimulationResult result;
  result.roles = roles;
  result.reports.reserve(static_cast<std::size_t>(config.total_rounds));
  for (int round = 0; round < config.total_rounds; ++round) {
    RoundResult rr = run_round(global, clients, round, config, covert, message,
                               validation, &result.observations);
    global = rr.new_global;
    if (on_round) on_round(round, rr, result.observations);
    result.reports.push_back(std::move(rr.report));
  }

  result.final_global = global;
  result.received = covert.payload_bits > 0
                        ? decode(result.observations, covert)
                        : Bitstream{};
  result.received.codec = message.codec;
  result.received.width = message.width;
  result.received.height = message.height;
  return result;
}

}  // namespace fedcov
