#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedcov/model.hpp"

namespace fedcov {

/// How the sender picks the magnitude written at covert positions.
/// Fixed uses an absolute value; Rms camouflages by matching the root mean
/// square of a seeded sample of the model's own weights.
struct FactorPolicy {
  enum class Kind { Fixed, Rms };
  Kind kind = Kind::Rms;
  double fixed_value = 0.0;
  Index sample_size = 500;

  static FactorPolicy fixed(double value) {
    return {Kind::Fixed, value, 0};
  }
  static FactorPolicy rms(Index sample_size = 500) {
    return {Kind::Rms, 0.0, sample_size};
  }
};

/// Decode threshold: compare a cycle mean against zero, or against the
/// long-run mean of that position's recorded observations.
enum class ThresholdPolicy { Zero, RunningMean };

/// Positive magnitude written at a covert position; the sign carries the bit.
struct FactorValue {
  double value = 0.0;

  explicit FactorValue(double v) : value(v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("FactorValue must be positive and finite");
  }
};

/// The shared secret between sender and receiver. Everything the receiver
/// needs to decode is here; nothing is transmitted in-band.
struct CovertConfig {
  std::vector<Index> positions;   // distinct flat indices into the parameters
  int cycle_rounds = 20;          // rounds per cycle
  int num_cycles = 0;             // payload cycles after warmup
  Index payload_bits = 0;         // bits actually carried (<= positions * cycles)
  FactorPolicy factor_policy;
  ThresholdPolicy threshold_policy = ThresholdPolicy::Zero;
  int warmup_rounds = 0;          // leading rounds where the sender zeroes positions
  std::uint64_t shared_seed = 0;

  /// Rounds the protocol occupies: warmup plus all payload cycles.
  int transmission_rounds() const {
    return warmup_rounds + num_cycles * cycle_rounds;
  }

  void validate(Index parameter_count) const;
};

/// Payload bits plus enough codec metadata to restore the original form.
struct Bitstream {
  enum class Codec { RawBits, Text8, Bitmap1 };

  std::vector<std::uint8_t> bits;  // each element 0 or 1
  Codec codec = Codec::RawBits;
  Index width = 0;   // Bitmap1 only
  Index height = 0;  // Bitmap1 only

  Index size() const { return static_cast<Index>(bits.size()); }
  bool operator==(const Bitstream&) const = default;

  std::string to_string01() const;
  static Bitstream from_string01(const std::string& s);
};

/// Receiver-side record of the global values at the agreed positions,
/// appended once per round in strictly increasing round order.
struct ObservationLog {
  std::vector<int> rounds;
  std::vector<Vector> entries;  // each of length |positions|

  Index size() const { return static_cast<Index>(entries.size()); }

  void append(int round_index, Vector observed) {
    if (!rounds.empty() && round_index <= rounds.back())
      throw ConfigError("ObservationLog rounds must be strictly increasing");
    rounds.push_back(round_index);
    entries.push_back(std::move(observed));
  }
};

/// Seeded choice of `count` distinct flat indices. Sender and receiver call
/// this independently with the shared seed and obtain the same list.
std::vector<Index> select_positions(Index parameter_count, Index count,
                                    std::uint64_t shared_seed);

/// Resolve the factor policy against a concrete parameter vector.
FactorValue compute_factor(const ParamVector& params,
                           const FactorPolicy& policy, std::uint64_t seed);

/// Write one cycle's bits: position j gets sign(2*bit-1) * factor, positions
/// beyond the bit count are set to zero. Returns a modified copy.
ParamVector embed_bits(const ParamVector& params,
                       const std::vector<std::uint8_t>& cycle_bits,
                       const std::vector<Index>& positions,
                       const FactorValue& factor);

/// Zero the agreed positions (warmup behaviour before the first cycle).
ParamVector zero_back(const ParamVector& params,
                      const std::vector<Index>& positions);

/// Cycle-mean threshold decoder. Bits come out cycle-major, position-minor,
/// truncated to payload_bits.
Bitstream decode(const ObservationLog& log, const CovertConfig& config);

// Text codec: 8 bits per byte, most significant bit first.
Bitstream encode_text(const std::string& text);
std::string decode_text(const Bitstream& bits);

// 1-bit bitmap codec: row-major, one bit per pixel.
Bitstream encode_bitmap(const std::vector<std::uint8_t>& pixels, Index width,
                        Index height);
std::vector<std::uint8_t> decode_bitmap(const Bitstream& bits, Index* width,
                                        Index* height);

/// Channel capacity over T rounds: full cycles times positions, and the
/// per-round rate B/T.
struct Capacity {
  std::int64_t total_bits = 0;  // B
  double bits_per_round = 0.0;  // R
};
Capacity capacity(std::int64_t total_rounds, Index num_positions,
                  int cycle_rounds);

// Payload file formats: PBM (P1) for bitmaps, raw bytes for text.
Bitstream read_pbm(const std::filesystem::path& path);
void write_pbm(const std::filesystem::path& path, const Bitstream& bitmap);
std::string read_text_payload(const std::filesystem::path& path);
void write_text_payload(const std::filesystem::path& path,
                        const std::string& text);

}  // namespace fedcov
