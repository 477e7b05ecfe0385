// fedcovert: scenario runner for the federated covert-channel simulator.
//
// Verbs:
//   run          execute one scenario file, write artifacts
//   sweep        repeat a scenario along one axis (clients / ratio / noise)
//   capacity     print channel capacity for (rounds, positions, cycle)
//   encode-text  turn text into the channel's bit representation
//   decode-trace re-decode a recorded observations.csv offline

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedcov/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFraming = 4;
constexpr int kExitDecodeMismatch = 5;

fedcov::ObservationLog read_observations_csv(const std::string& path,
                                             std::vector<fedcov::Index>* positions) {
  std::ifstream in(path);
  if (!in) throw fedcov::IoError("cannot open observations file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw fedcov::IoError("empty observations file: " + path);

  positions->clear();
  std::stringstream header(line);
  std::string cell;
  bool first = true;
  while (std::getline(header, cell, ',')) {
    if (first) {
      first = false;
      continue;  // "round"
    }
    if (cell.empty() || cell[0] != 'p')
      throw fedcov::ConfigError("bad observations header column: " + cell);
    positions->push_back(std::stol(cell.substr(1)));
  }

  fedcov::ObservationLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::getline(row, cell, ',');
    const int round = std::stoi(cell);
    fedcov::Vector values(static_cast<fedcov::Index>(positions->size()));
    for (fedcov::Index j = 0; j < values.size(); ++j) {
      if (!std::getline(row, cell, ','))
        throw fedcov::ConfigError("observations row shorter than header");
      values[j] = std::stod(cell);
    }
    log.append(round, std::move(values));
  }
  return log;
}

void apply_overrides(fedcov::Scenario& scenario, const std::string& out_dir,
                     const std::optional<std::uint64_t>& seed,
                     const std::string& threshold,
                     const std::optional<double>& noise) {
  if (!out_dir.empty()) scenario.output_dir = out_dir;
  if (seed) scenario.fed.master_seed = *seed;
  if (!threshold.empty())
    scenario.threshold_policy = threshold == "mean"
                                    ? fedcov::ThresholdPolicy::RunningMean
                                    : fedcov::ThresholdPolicy::Zero;
  if (noise) scenario.fed.noise_level = *noise;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"federated-learning covert channel simulator"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "execute one scenario");
  std::string run_config, run_out, run_threshold;
  std::optional<std::uint64_t> run_seed;
  std::optional<double> run_noise;
  run->add_option("--config", run_config, "scenario JSON file")->required();
  run->add_option("--out", run_out, "output directory override");
  run->add_option("--seed", run_seed, "master seed override");
  run->add_option("--threshold", run_threshold, "decode threshold override")
      ->check(CLI::IsMember({"zero", "mean"}));
  run->add_option("--noise", run_noise, "noise level override in [0,1]")
      ->check(CLI::Range(0.0, 1.0));

  // --- sweep ---
  auto* sweep = app.add_subcommand("sweep", "run a scenario along one axis");
  std::string sweep_config, sweep_axis, sweep_out;
  std::vector<double> sweep_values;
  int sweep_seeds = 1;
  sweep->add_option("--config", sweep_config, "base scenario JSON file")->required();
  sweep->add_option("--axis", sweep_axis, "axis to vary")
      ->required()
      ->check(CLI::IsMember({"clients", "attacker_ratio", "noise"}));
  sweep->add_option("--values", sweep_values, "axis values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--seeds", sweep_seeds, "seeds per value")->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_out, "output directory override");

  // --- capacity ---
  auto* cap = app.add_subcommand("capacity", "print channel capacity");
  std::int64_t cap_rounds = 0;
  fedcov::Index cap_positions = 0;
  int cap_cycle = 0;
  cap->add_option("--rounds", cap_rounds, "total training rounds T")->required();
  cap->add_option("--positions", cap_positions, "weights used per round")->required();
  cap->add_option("--cycle", cap_cycle, "rounds per cycle")->required();

  // --- encode-text ---
  auto* enc = app.add_subcommand("encode-text", "text to channel bits");
  std::string enc_text, enc_in, enc_out;
  enc->add_option("--text", enc_text, "literal text");
  enc->add_option("--in", enc_in, "read text from file");
  enc->add_option("--out", enc_out, "write bits to file instead of stdout");

  // --- decode-trace ---
  auto* dec = app.add_subcommand("decode-trace",
                                 "re-decode a recorded observations.csv");
  std::string dec_obs, dec_config, dec_threshold, dec_out;
  dec->add_option("--observations", dec_obs, "observations.csv from a run")->required();
  dec->add_option("--config", dec_config, "scenario JSON that produced it")->required();
  dec->add_option("--threshold", dec_threshold, "decode threshold override")
      ->check(CLI::IsMember({"zero", "mean"}));
  dec->add_option("--out", dec_out, "write decoded payload to file");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    fedcov::Scenario scenario = fedcov::load_scenario(run_config);
    apply_overrides(scenario, run_out, run_seed, run_threshold, run_noise);
    const fedcov::RunArtifacts art = fedcov::run_scenario(scenario);
    std::cout << "run " << scenario.name << ": rounds="
              << scenario.fed.total_rounds;
    if (art.ber) {
      std::cout << " ber=" << fedcov::format_real(*art.ber)
                << " first_success=";
      if (art.first_success_round)
        std::cout << *art.first_success_round;
      else
        std::cout << "none";
    }
    std::cout << " final_accuracy="
              << fedcov::format_real(art.final_global_accuracy) << "\n"
              << "artifacts in " << art.output_dir.string() << "\n";
    if (!art.decode_success && !scenario.best_effort) return kExitDecodeMismatch;
    return 0;
  }

  if (sweep->parsed()) {
    fedcov::Scenario base = fedcov::load_scenario(sweep_config);
    if (!sweep_out.empty()) base.output_dir = sweep_out;
    fedcov::SweepAxis axis = fedcov::SweepAxis::Noise;
    if (sweep_axis == "clients") axis = fedcov::SweepAxis::Clients;
    if (sweep_axis == "attacker_ratio") axis = fedcov::SweepAxis::AttackerRatio;
    const fedcov::SweepResult result =
        fedcov::run_sweep(base, axis, sweep_values, sweep_seeds);
    for (const auto& p : result.points)
      std::cout << sweep_axis << "=" << fedcov::format_real(p.value)
                << " mean_accuracy=" << fedcov::format_real(p.mean_final_accuracy)
                << " mean_ber=" << fedcov::format_real(p.mean_ber)
                << " mean_amplitude="
                << fedcov::format_real(p.mean_cycle_amplitude) << "\n";
    std::cout << "sweep summary in " << result.summary_json.string() << "\n";
    return 0;
  }

  if (cap->parsed()) {
    const fedcov::Capacity c =
        fedcov::capacity(cap_rounds, cap_positions, cap_cycle);
    std::cout << "B=" << c.total_bits << " R="
              << fedcov::format_real(c.bits_per_round) << "\n";
    return 0;
  }

  if (enc->parsed()) {
    if (enc_text.empty() == enc_in.empty())
      throw fedcov::ConfigError("encode-text: give exactly one of --text / --in");
    const std::string text =
        enc_in.empty() ? enc_text : fedcov::read_text_payload(enc_in);
    const std::string bits = fedcov::encode_text(text).to_string01();
    if (enc_out.empty()) {
      std::cout << bits << "\n";
    } else {
      std::ofstream out(enc_out);
      if (!out) throw fedcov::IoError("cannot write " + enc_out);
      out << bits << "\n";
    }
    return 0;
  }

  if (dec->parsed()) {
    fedcov::Scenario scenario = fedcov::load_scenario(dec_config);
    if (!dec_threshold.empty())
      scenario.threshold_policy = dec_threshold == "mean"
                                      ? fedcov::ThresholdPolicy::RunningMean
                                      : fedcov::ThresholdPolicy::Zero;
    const fedcov::Bitstream sent = fedcov::load_payload(scenario);
    fedcov::CovertConfig covert =
        fedcov::build_covert_config(scenario, sent.size());

    std::vector<fedcov::Index> positions;
    const fedcov::ObservationLog log = read_observations_csv(dec_obs, &positions);
    if (positions != covert.positions)
      throw fedcov::ConfigError(
          "observations.csv positions do not match the scenario's shared seed");

    const fedcov::Bitstream decoded = fedcov::decode(log, covert);
    const double ber = fedcov::bit_error_rate(sent, decoded);
    std::cout << "decoded_bits=" << decoded.to_string01() << "\n";
    if (sent.codec == fedcov::Bitstream::Codec::Text8 &&
        decoded.size() % 8 == 0)
      std::cout << "decoded_text=" << fedcov::decode_text(decoded) << "\n";
    std::cout << "ber=" << fedcov::format_real(ber) << "\n";
    if (!dec_out.empty()) {
      std::ofstream out(dec_out);
      if (!out) throw fedcov::IoError("cannot write " + dec_out);
      out << decoded.to_string01() << "\n";
    }
    return ber == 0.0 ? 0 : kExitDecodeMismatch;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const fedcov::FramingError& e) {
    std::cerr << "framing error: " << e.what() << "\n";
    return kExitFraming;
  } catch (const fedcov::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fedcov::IncompleteTransmissionError& e) {
    std::cerr << "incomplete transmission: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fedcov::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
