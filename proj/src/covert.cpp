#include "fedcov/covert.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "fedcov/rng.hpp"

namespace fedcov {

void CovertConfig::validate(Index parameter_count) const {
  if (cycle_rounds < 1) throw ConfigError("cycle_rounds must be >= 1");
  if (num_cycles < 0 || warmup_rounds < 0 || payload_bits < 0)
    throw ConfigError("covert counts must be non-negative");
  std::unordered_set<Index> seen;
  for (Index p : positions) {
    if (p < 0 || p >= parameter_count)
      throw ConfigError("covert position out of range");
    if (!seen.insert(p).second)
      throw ConfigError("covert positions must be distinct");
  }
  if (payload_bits > static_cast<Index>(positions.size()) * num_cycles)
    throw ConfigError("payload_bits exceeds positions * num_cycles");
  if (factor_policy.kind == FactorPolicy::Kind::Fixed &&
      !(factor_policy.fixed_value > 0.0))
    throw ConfigError("fixed factor must be positive");
  if (factor_policy.kind == FactorPolicy::Kind::Rms &&
      factor_policy.sample_size < 1)
    throw ConfigError("rms sample_size must be >= 1");
}

std::string Bitstream::to_string01() const {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

Bitstream Bitstream::from_string01(const std::string& s) {
  Bitstream out;
  out.bits.reserve(s.size());
  for (char c : s) {
    if (c == '0' || c == '1')
      out.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    else if (!std::isspace(static_cast<unsigned char>(c)))
      throw FramingError("bit string may only contain 0, 1 and whitespace");
  }
  return out;
}

std::vector<Index> select_positions(Index parameter_count, Index count,
                                    std::uint64_t shared_seed) {
  if (count < 0 || count > parameter_count)
    throw ConfigError("select_positions: count must be in [0, parameter_count]");
  SplitMix64 rng(shared_seed);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  std::unordered_set<Index> seen;
  while (static_cast<Index>(out.size()) < count) {
    const auto idx = static_cast<Index>(
        rng.next_below(static_cast<std::uint64_t>(parameter_count)));
    if (seen.insert(idx).second) out.push_back(idx);
  }
  return out;
}

FactorValue compute_factor(const ParamVector& params,
                           const FactorPolicy& policy, std::uint64_t seed) {
  if (policy.kind == FactorPolicy::Kind::Fixed)
    return FactorValue(policy.fixed_value);

  const Index n = params.size();
  if (policy.sample_size > n)
    throw ConfigError("rms sample_size exceeds parameter count");
  SplitMix64 rng(seed);
  double sum_sq = 0.0;
  for (Index i = 0; i < policy.sample_size; ++i) {
    const auto idx =
        static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));
    sum_sq += params.values[idx] * params.values[idx];
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(policy.sample_size));
  if (!(rms > 0.0))
    throw ConfigError("degenerate factor: sampled weights are all zero");
  return FactorValue(rms);
}

ParamVector embed_bits(const ParamVector& params,
                       const std::vector<std::uint8_t>& cycle_bits,
                       const std::vector<Index>& positions,
                       const FactorValue& factor) {
  if (cycle_bits.size() > positions.size())
    throw ConfigError("embed_bits: more bits than positions");
  ParamVector out = params;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (positions[j] < 0 || positions[j] >= out.size())
      throw ConfigError("embed_bits: position out of range");
    if (j < cycle_bits.size())
      out.values[positions[j]] =
          (2.0 * static_cast<double>(cycle_bits[j]) - 1.0) * factor.value;
    else
      out.values[positions[j]] = 0.0;
  }
  return out;
}

ParamVector zero_back(const ParamVector& params,
                      const std::vector<Index>& positions) {
  ParamVector out = params;
  for (Index p : positions) {
    if (p < 0 || p >= out.size())
      throw ConfigError("zero_back: position out of range");
    out.values[p] = 0.0;
  }
  return out;
}

Bitstream decode(const ObservationLog& log, const CovertConfig& config) {
  const auto num_positions = static_cast<Index>(config.positions.size());
  const Index required = config.transmission_rounds();
  if (log.size() < required)
    throw IncompleteTransmissionError(
        "observation log covers " + std::to_string(log.size()) +
        " rounds, transmission needs " + std::to_string(required));
  for (const auto& e : log.entries)
    if (e.size() != num_positions)
      throw ConfigError("observation entry width != number of positions");

  // Per-position threshold.
  Vector theta = Vector::Zero(num_positions);
  if (config.threshold_policy == ThresholdPolicy::RunningMean &&
      log.size() > 0) {
    for (const auto& e : log.entries) theta += e;
    theta /= static_cast<double>(log.size());
  }

  Bitstream out;
  out.bits.reserve(static_cast<std::size_t>(config.payload_bits));
  for (int s = 0; s < config.num_cycles; ++s) {
    const Index begin = config.warmup_rounds + s * config.cycle_rounds;
    Vector cycle_mean = Vector::Zero(num_positions);
    for (int r = 0; r < config.cycle_rounds; ++r)
      cycle_mean += log.entries[static_cast<std::size_t>(begin + r)];
    cycle_mean /= static_cast<double>(config.cycle_rounds);
    for (Index j = 0; j < num_positions; ++j) {
      if (static_cast<Index>(out.bits.size()) >= config.payload_bits) break;
      out.bits.push_back(cycle_mean[j] > theta[j] ? 1 : 0);
    }
  }
  out.bits.resize(static_cast<std::size_t>(config.payload_bits));
  return out;
}

Bitstream encode_text(const std::string& text) {
  Bitstream out;
  out.codec = Bitstream::Codec::Text8;
  out.bits.reserve(text.size() * 8);
  for (char ch : text) {
    const auto byte = static_cast<std::uint8_t>(ch);
    for (int bit = 7; bit >= 0; --bit)
      out.bits.push_back(static_cast<std::uint8_t>((byte >> bit) & 1u));
  }
  return out;
}

std::string decode_text(const Bitstream& bits) {
  if (bits.bits.size() % 8 != 0)
    throw FramingError("text decode requires a multiple of 8 bits");
  std::string out;
  out.reserve(bits.bits.size() / 8);
  for (std::size_t i = 0; i < bits.bits.size(); i += 8) {
    std::uint8_t byte = 0;
    for (std::size_t k = 0; k < 8; ++k)
      byte = static_cast<std::uint8_t>((byte << 1) | (bits.bits[i + k] & 1u));
    out.push_back(static_cast<char>(byte));
  }
  return out;
}

Bitstream encode_bitmap(const std::vector<std::uint8_t>& pixels, Index width,
                        Index height) {
  if (static_cast<Index>(pixels.size()) != width * height)
    throw FramingError("bitmap pixel count != width * height");
  Bitstream out;
  out.codec = Bitstream::Codec::Bitmap1;
  out.width = width;
  out.height = height;
  out.bits.reserve(pixels.size());
  for (auto p : pixels) {
    if (p > 1) throw FramingError("bitmap pixels must be 0 or 1");
    out.bits.push_back(p);
  }
  return out;
}

std::vector<std::uint8_t> decode_bitmap(const Bitstream& bits, Index* width,
                                        Index* height) {
  if (bits.width < 1 || bits.height < 1 ||
      static_cast<Index>(bits.bits.size()) != bits.width * bits.height)
    throw FramingError("bitmap bit count != width * height");
  if (width) *width = bits.width;
  if (height) *height = bits.height;
  return bits.bits;
}

Capacity capacity(std::int64_t total_rounds, Index num_positions,
                  int cycle_rounds) {
  if (total_rounds < 1 || num_positions < 1 || cycle_rounds < 1)
    throw ConfigError("capacity: all arguments must be positive");
  Capacity c;
  c.total_bits = (total_rounds / cycle_rounds) * static_cast<std::int64_t>(num_positions);
  c.bits_per_round =
      static_cast<double>(c.total_bits) / static_cast<double>(total_rounds);
  return c;
}

Bitstream read_pbm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PBM file: " + path.string());

  // Token reader skipping whitespace and # comments.
  auto next_token = [&in]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(c);
    }
    return tok;
  };

  if (next_token() != "P1") throw FramingError("not a P1 PBM file");
  Index width = 0, height = 0;
  try {
    width = std::stol(next_token());
    height = std::stol(next_token());
  } catch (const std::exception&) {
    throw FramingError("bad PBM dimensions");
  }
  if (width < 1 || height < 1) throw FramingError("bad PBM dimensions");

  Bitstream out;
  out.codec = Bitstream::Codec::Bitmap1;
  out.width = width;
  out.height = height;
  out.bits.reserve(static_cast<std::size_t>(width * height));
  char c;
  while (static_cast<Index>(out.bits.size()) < width * height && in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (c == '0' || c == '1') {
      out.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw FramingError("unexpected character in PBM raster");
    }
  }
  if (static_cast<Index>(out.bits.size()) != width * height)
    throw FramingError("PBM raster shorter than width * height");
  return out;
}

void write_pbm(const std::filesystem::path& path, const Bitstream& bitmap) {
  if (bitmap.width < 1 || bitmap.height < 1 ||
      static_cast<Index>(bitmap.bits.size()) != bitmap.width * bitmap.height)
    throw FramingError("bitmap bit count != width * height");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write PBM file: " + path.string());
  out << "P1\n" << bitmap.width << " " << bitmap.height << "\n";
  // Keep raster lines short; P1 readers expect lines under ~70 chars.
  Index col = 0;
  for (std::size_t i = 0; i < bitmap.bits.size(); ++i) {
    out << (bitmap.bits[i] ? '1' : '0');
    if (++col == 32 || i + 1 == bitmap.bits.size()) {
      out << '\n';
      col = 0;
    } else {
      out << ' ';
    }
  }
  if (!out) throw IoError("failed writing PBM file: " + path.string());
}

std::string read_text_payload(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open text payload: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  // A single trailing newline is treated as file formatting, not payload.
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

void write_text_payload(const std::filesystem::path& path,
                        const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write text payload: " + path.string());
  out << text << '\n';
  if (!out) throw IoError("failed writing text payload: " + path.string());
}

}  // namespace fedcov
