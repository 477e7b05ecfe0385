#include "fedcov/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedcov/rng.hpp"

namespace fedcov {

using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos &&
      s.find_first_of("0123456789") != std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

double round9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

double bit_error_rate(const Bitstream& sent, const Bitstream& received) {
  if (sent.size() == 0) {
    if (received.size() == 0) return 0.0;
    throw ConfigError("bit_error_rate: nothing was sent");
  }
  const auto common = std::min(sent.bits.size(), received.bits.size());
  std::size_t errors =
      sent.bits.size() - common;  // bits never delivered count as errors
  for (std::size_t i = 0; i < common; ++i)
    if (sent.bits[i] != received.bits[i]) ++errors;
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw ConfigError("spearman: need two equal-length series");
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0.0 || dy == 0.0) return 0.0;
  return num / std::sqrt(dx * dy);
}

// --------------------------------------------------------------------------
// Scenario parsing
// --------------------------------------------------------------------------

namespace {

FactorPolicy parse_factor(const json& j) {
  const std::string policy = j.value("policy", "rms");
  if (policy == "fixed") return FactorPolicy::fixed(j.at("value").get<double>());
  if (policy == "rms")
    return FactorPolicy::rms(j.value("sample_size", Index{500}));
  throw ConfigError("unknown factor policy: " + policy);
}

ThresholdPolicy parse_threshold(const std::string& s) {
  if (s == "zero") return ThresholdPolicy::Zero;
  if (s == "mean") return ThresholdPolicy::RunningMean;
  throw ConfigError("unknown threshold policy: " + s);
}

PayloadSource parse_payload(const json& j,
                            const std::filesystem::path& base_dir) {
  PayloadSource p;
  const std::string type = j.value("type", "none");
  auto resolve = [&](const std::string& raw) {
    std::filesystem::path fp(raw);
    return fp.is_absolute() ? fp : base_dir / fp;
  };
  if (type == "none") {
    p.type = PayloadSource::Type::None;
  } else if (type == "bits") {
    p.type = PayloadSource::Type::InlineBits;
    p.inline_value = j.at("bits").get<std::string>();
  } else if (type == "text") {
    p.type = PayloadSource::Type::InlineText;
    p.inline_value = j.at("text").get<std::string>();
  } else if (type == "text_file") {
    p.type = PayloadSource::Type::TextFile;
    p.path = resolve(j.at("path").get<std::string>());
  } else if (type == "pbm") {
    p.type = PayloadSource::Type::PbmFile;
    p.path = resolve(j.at("path").get<std::string>());
  } else {
    throw ConfigError("unknown payload type: " + type);
  }
  return p;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text,
                        const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  try {
    Scenario s;
    s.name = j.value("name", "scenario");

    const json& fed = j.at("fed");
    s.fed.num_clients = fed.at("num_clients").get<int>();
    s.fed.total_rounds = fed.at("total_rounds").get<int>();
    s.fed.attacker_ratio = fed.value("attacker_ratio", 0.0);
    if (fed.contains("num_senders"))
      s.fed.num_senders = fed.at("num_senders").get<int>();
    s.fed.noise_level = fed.value("noise_level", 0.0);
    s.fed.noise_scope = fed.value("noise_scope", std::string("all")) == "sender"
                            ? NoiseScope::SenderOnly
                            : NoiseScope::AllClients;
    s.fed.master_seed = fed.value("master_seed", std::uint64_t{1});

    const json& model = fed.at("model");
    s.fed.model.input_dim = model.at("input_dim").get<Index>();
    s.fed.model.hidden_dim = model.at("hidden_dim").get<Index>();
    s.fed.model.num_classes = model.at("num_classes").get<Index>();

    if (fed.contains("training")) {
      const json& tr = fed.at("training");
      s.fed.training.epochs = tr.value("epochs", 1);
      s.fed.training.learning_rate = tr.value("learning_rate", 0.1);
      s.fed.training.batch_size = tr.value("batch_size", Index{32});
    }
    if (fed.contains("data")) {
      const json& d = fed.at("data");
      s.fed.data.samples_per_class = d.value("samples_per_class", Index{50});
      s.fed.data.cluster_spread = d.value("cluster_spread", 0.5);
      s.fed.data.validation_samples_per_class =
          d.value("validation_samples_per_class", Index{20});
    }

    if (j.contains("covert")) {
      const json& c = j.at("covert");
      s.covert_enabled = c.value("enabled", true);
      s.num_positions = c.value("num_positions", Index{0});
      s.cycle_rounds = c.value("cycle_rounds", 20);
      s.warmup_rounds = c.value("warmup_rounds", 0);
      s.shared_seed = c.value("shared_seed", std::uint64_t{0});
      if (c.contains("factor")) s.factor_policy = parse_factor(c.at("factor"));
      s.threshold_policy =
          parse_threshold(c.value("threshold", std::string("zero")));
    }

    if (j.contains("payload"))
      s.payload = parse_payload(j.at("payload"), base_dir);

    if (j.contains("detectors")) {
      const json& d = j.at("detectors");
      s.detectors.l2 = d.value("l2", false);
      s.detectors.cosine = d.value("cosine", false);
      s.detectors.accuracy = d.value("accuracy", false);
      s.detectors.recorder = d.value("recorder", false);
      s.detectors.options.z_threshold = d.value("z_threshold", 3.0);
      s.detectors.options.recorder_threshold =
          d.value("recorder_score_threshold", 0.5);
      if (d.contains("recorder_hypotheses"))
        s.detectors.recorder_hypotheses =
            d.at("recorder_hypotheses").get<std::vector<int>>();
    }

    s.best_effort = j.value("best_effort", false);
    if (j.contains("output_dir"))
      s.output_dir = j.at("output_dir").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

Bitstream load_payload(const Scenario& scenario) {
  switch (scenario.payload.type) {
    case PayloadSource::Type::None:
      return {};
    case PayloadSource::Type::InlineBits:
      return Bitstream::from_string01(scenario.payload.inline_value);
    case PayloadSource::Type::InlineText:
      return encode_text(scenario.payload.inline_value);
    case PayloadSource::Type::TextFile:
      return encode_text(read_text_payload(scenario.payload.path));
    case PayloadSource::Type::PbmFile:
      return read_pbm(scenario.payload.path);
  }
  throw ConfigError("unhandled payload type");
}

CovertConfig build_covert_config(const Scenario& scenario,
                                 Index payload_bits) {
  CovertConfig c;
  c.cycle_rounds = scenario.cycle_rounds;
  c.warmup_rounds = scenario.warmup_rounds;
  c.shared_seed = scenario.shared_seed;
  c.factor_policy = scenario.factor_policy;
  c.threshold_policy = scenario.threshold_policy;
  if (!scenario.covert_enabled || scenario.num_positions == 0 ||
      payload_bits == 0)
    return c;  // inert channel
  c.positions = select_positions(scenario.fed.model.parameter_count(),
                                 scenario.num_positions, scenario.shared_seed);
  c.payload_bits = payload_bits;
  c.num_cycles = static_cast<int>(
      (payload_bits + scenario.num_positions - 1) / scenario.num_positions);
  return c;
}

// --------------------------------------------------------------------------
// Artifact writing
// --------------------------------------------------------------------------

namespace {

struct DetectionRound {
  int round = 0;
  std::optional<L2Report> l2;
  std::optional<SimilarityReport> cosine;
  std::optional<AccuracyReport> accuracy;
};

bool client_flagged(const std::vector<ClientFlag>& flags, int id) {
  return std::any_of(flags.begin(), flags.end(),
                     [id](const ClientFlag& f) { return f.client_id == id; });
}

void write_rounds_csv(const std::filesystem::path& path,
                      const std::vector<RoundReport>& reports,
                      const std::vector<ClientRole>& roles) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "round,client,role,local_accuracy,l2_norm,mean_cosine,"
         "global_accuracy,applied_noise\n";
  auto role_name = [](ClientRole r) {
    switch (r) {
      case ClientRole::Sender: return "sender";
      case ClientRole::Receiver: return "receiver";
      default: return "benign";
    }
  };
  for (const auto& rep : reports) {
    const auto m = static_cast<Index>(rep.local_accuracies.size());
    for (Index c = 0; c < m; ++c) {
      double mean_cos = 0.0;
      for (Index j = 0; j < m; ++j)
        if (j != c) mean_cos += rep.cosine_matrix(c, j);
      if (m > 1) mean_cos /= static_cast<double>(m - 1);
      out << rep.round_index << ',' << c << ','
          << role_name(roles[static_cast<std::size_t>(c)]) << ','
          << format_real(rep.local_accuracies[static_cast<std::size_t>(c)])
          << ',' << format_real(rep.l2_norms[static_cast<std::size_t>(c)])
          << ',' << format_real(mean_cos) << ','
          << format_real(rep.global_accuracy) << ','
          << format_real(rep.applied_noise) << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_observations_csv(const std::filesystem::path& path,
                            const ObservationLog& log,
                            const std::vector<Index>& positions) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "round";
  for (Index p : positions) out << ",p" << p;
  out << '\n';
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    out << log.rounds[i];
    for (Index j = 0; j < log.entries[i].size(); ++j)
      out << ',' << format_real(log.entries[i][j]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_detection_artifacts(const std::filesystem::path& csv_path,
                               const std::filesystem::path& json_path,
                               const std::vector<DetectionRound>& rounds,
                               const std::optional<RecorderReport>& recorder) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  csv << "round,client,l2_norm,l2_z,l2_flag,cosine_mean,cosine_flag,"
         "accuracy,accuracy_flag\n";
  for (const auto& dr : rounds) {
    std::size_t m = 0;
    if (dr.l2) m = dr.l2->norms.size();
    else if (dr.cosine) m = dr.cosine->mean_similarity.size();
    else if (dr.accuracy) m = dr.accuracy->accuracies.size();
    for (std::size_t c = 0; c < m; ++c) {
      const int id = static_cast<int>(c);
      csv << dr.round << ',' << id << ',';
      if (dr.l2) {
        csv << format_real(dr.l2->norms[c]) << ','
            << format_real(dr.l2->z_scores[c]) << ','
            << client_flagged(dr.l2->flagged, id);
      } else {
        csv << ",,";
      }
      csv << ',';
      if (dr.cosine) {
        csv << format_real(dr.cosine->mean_similarity[c]) << ','
            << client_flagged(dr.cosine->flagged, id);
      } else {
        csv << ',';
      }
      csv << ',';
      if (dr.accuracy) {
        csv << format_real(dr.accuracy->accuracies[c]) << ','
            << client_flagged(dr.accuracy->flagged, id);
      } else {
        csv << ',';
      }
      csv << '\n';
    }
  }
  if (!csv) throw IoError("failed writing " + csv_path.string());

  json j;
  j["rounds"] = json::array();
  for (const auto& dr : rounds) {
    json jr;
    jr["round"] = dr.round;
    if (dr.l2) {
      json flags = json::array();
      for (const auto& f : dr.l2->flagged) flags.push_back(f.client_id);
      json norms = json::array(), zs = json::array();
      for (double v : dr.l2->norms) norms.push_back(round9(v));
      for (double v : dr.l2->z_scores) zs.push_back(round9(v));
      jr["l2"] = {{"norms", norms}, {"z_scores", zs}, {"flagged", flags}};
    }
    if (dr.cosine) {
      json flags = json::array();
      for (const auto& f : dr.cosine->flagged) flags.push_back(f.client_id);
      json matrix = json::array();
      for (Index r = 0; r < dr.cosine->pairwise_cosine.rows(); ++r) {
        json row = json::array();
        for (Index c2 = 0; c2 < dr.cosine->pairwise_cosine.cols(); ++c2)
          row.push_back(round9(dr.cosine->pairwise_cosine(r, c2)));
        matrix.push_back(row);
      }
      jr["cosine"] = {{"pairwise", matrix}, {"flagged", flags}};
    }
    if (dr.accuracy) {
      json flags = json::array();
      for (const auto& f : dr.accuracy->flagged) flags.push_back(f.client_id);
      json accs = json::array();
      for (double v : dr.accuracy->accuracies) accs.push_back(round9(v));
      jr["accuracy"] = {{"values", accs}, {"flagged", flags}};
    }
    j["rounds"].push_back(std::move(jr));
  }
  if (recorder) {
    json findings = json::array();
    const std::size_t top = std::min<std::size_t>(recorder->ranked.size(), 100);
    for (std::size_t i = 0; i < top; ++i) {
      const auto& f = recorder->ranked[i];
      findings.push_back({{"client", f.client_id},
                          {"position", f.position},
                          {"score", round9(f.score)},
                          {"cycle", f.best_hypothesis}});
    }
    json flagged = json::array();
    for (const auto& f : recorder->flagged)
      flagged.push_back({{"client", f.client_id},
                         {"position", f.position},
                         {"score", round9(f.score)},
                         {"cycle", f.best_hypothesis}});
    j["recorder"] = {{"top", findings}, {"flagged", flagged}};
  }
  std::ofstream jf(json_path);
  if (!jf) throw IoError("cannot write " + json_path.string());
  jf << j.dump(2) << '\n';
  if (!jf) throw IoError("failed writing " + json_path.string());
}

/// Mean absolute distance between cycle means and the decode threshold,
/// over the position/cycle slots the payload occupies.
double mean_cycle_amplitude(const ObservationLog& log,
                            const CovertConfig& covert) {
  if (covert.payload_bits == 0 ||
      log.size() < covert.transmission_rounds())
    return 0.0;
  const auto num_positions = static_cast<Index>(covert.positions.size());
  Vector theta = Vector::Zero(num_positions);
  if (covert.threshold_policy == ThresholdPolicy::RunningMean) {
    for (const auto& e : log.entries) theta += e;
    theta /= static_cast<double>(log.size());
  }
  double sum = 0.0;
  Index slots = 0;
  for (int s = 0; s < covert.num_cycles; ++s) {
    const Index begin = covert.warmup_rounds + s * covert.cycle_rounds;
    Vector cycle_mean = Vector::Zero(num_positions);
    for (int r = 0; r < covert.cycle_rounds; ++r)
      cycle_mean += log.entries[static_cast<std::size_t>(begin + r)];
    cycle_mean /= static_cast<double>(covert.cycle_rounds);
    for (Index j = 0; j < num_positions; ++j) {
      if (static_cast<Index>(s) * num_positions + j >= covert.payload_bits)
        break;
      sum += std::abs(cycle_mean[j] - theta[j]);
      ++slots;
    }
  }
  return slots > 0 ? sum / static_cast<double>(slots) : 0.0;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& scenario) {
  const Bitstream sent = load_payload(scenario);
  const CovertConfig covert = build_covert_config(scenario, sent.size());

  std::error_code ec;
  std::filesystem::create_directories(scenario.output_dir, ec);
  if (ec)
    throw IoError("cannot create output directory: " +
                  scenario.output_dir.string());

  RunArtifacts artifacts;
  artifacts.output_dir = scenario.output_dir;
  artifacts.sent = sent;

  const bool detect_any = scenario.detectors.l2 || scenario.detectors.cosine ||
                          scenario.detectors.accuracy;
  std::vector<DetectionRound> detection_rounds;
  std::optional<WeightTrace> trace;
  if (scenario.detectors.recorder)
    trace = WeightTrace::all_positions(scenario.fed.model.parameter_count(),
                                       scenario.fed.num_clients);

  // Validation data regenerated exactly as inside the simulation so the
  // accuracy detector scores against the same hold-out set.
  const Dataset validation = make_data_split(scenario.fed).validation;

  std::optional<int> first_success;
  const int needed_rounds = covert.transmission_rounds();

  auto on_round = [&](int round, const RoundResult& rr,
                      const ObservationLog& log) {
    if (detect_any) {
      DetectionRound dr;
      dr.round = round;
      if (scenario.detectors.l2)
        dr.l2 = l2_report(rr.submitted, scenario.detectors.options);
      if (scenario.detectors.cosine)
        dr.cosine = cosine_report(rr.submitted, scenario.detectors.options);
      if (scenario.detectors.accuracy)
        dr.accuracy =
            accuracy_report(rr.submitted, validation, scenario.detectors.options);
      detection_rounds.push_back(std::move(dr));
    }
    if (trace) trace->record_round(rr.submitted);
    if (!first_success && covert.payload_bits > 0 &&
        log.size() >= needed_rounds) {
      if (decode(log, covert).bits == sent.bits) first_success = round + 1;
    }
  };

  SimulationResult sim =
      run_simulation(scenario.fed, covert, sent, on_round);

  artifacts.received = sim.received;
  artifacts.reports = sim.reports;
  artifacts.roles = sim.roles;
  artifacts.first_success_round = first_success;
  artifacts.final_global_accuracy =
      sim.reports.empty() ? 0.0 : sim.reports.back().global_accuracy;
  artifacts.mean_cycle_amplitude =
      mean_cycle_amplitude(sim.observations, covert);
  if (sent.size() > 0) {
    artifacts.ber = bit_error_rate(sent, sim.received);
    artifacts.decode_success = *artifacts.ber == 0.0;
  } else {
    artifacts.decode_success = true;
  }

  // Sender flag rates: fraction of rounds in which any sender was flagged.
  if (detect_any && !detection_rounds.empty()) {
    std::vector<int> senders;
    for (std::size_t c = 0; c < sim.roles.size(); ++c)
      if (sim.roles[c] == ClientRole::Sender)
        senders.push_back(static_cast<int>(c));
    auto rate = [&](auto member) {
      int hits = 0, rounds = 0;
      for (const auto& dr : detection_rounds) {
        const auto& rep = dr.*member;
        if (!rep) continue;
        ++rounds;
        for (int s : senders)
          if (client_flagged(rep->flagged, s)) {
            ++hits;
            break;
          }
      }
      return rounds > 0 ? static_cast<double>(hits) / rounds : 0.0;
    };
    if (scenario.detectors.l2)
      artifacts.sender_flag_rates["l2"] = rate(&DetectionRound::l2);
    if (scenario.detectors.cosine)
      artifacts.sender_flag_rates["cosine"] = rate(&DetectionRound::cosine);
    if (scenario.detectors.accuracy)
      artifacts.sender_flag_rates["accuracy"] = rate(&DetectionRound::accuracy);
  }

  // ---- artifacts on disk ----
  artifacts.rounds_csv = scenario.output_dir / "rounds.csv";
  write_rounds_csv(artifacts.rounds_csv, sim.reports, sim.roles);

  artifacts.observations_csv = scenario.output_dir / "observations.csv";
  write_observations_csv(artifacts.observations_csv, sim.observations,
                         covert.positions);

  if (sent.size() > 0) {
    switch (sent.codec) {
      case Bitstream::Codec::Text8: {
        auto p = scenario.output_dir / "decoded.txt";
        // Framing is part of the shared secret, so the received stream is
        // byte-aligned by construction.
        write_text_payload(p, decode_text(sim.received));
        artifacts.decoded_payload = p;
        break;
      }
      case Bitstream::Codec::Bitmap1: {
        auto p = scenario.output_dir / "decoded.pbm";
        write_pbm(p, sim.received);
        artifacts.decoded_payload = p;
        break;
      }
      case Bitstream::Codec::RawBits: {
        auto p = scenario.output_dir / "decoded_bits.txt";
        std::ofstream out(p);
        if (!out) throw IoError("cannot write " + p.string());
        out << sim.received.to_string01() << '\n';
        artifacts.decoded_payload = p;
        break;
      }
    }
    // The sent payload is also materialized so BER is recomputable from
    // files alone.
    std::ofstream sf(scenario.output_dir / "sent_bits.txt");
    if (!sf) throw IoError("cannot write sent_bits.txt");
    sf << sent.to_string01() << '\n';
  }

  if (detect_any || trace) {
    std::optional<RecorderReport> recorder;
    if (trace) {
      std::vector<int> hypotheses = scenario.detectors.recorder_hypotheses;
      if (hypotheses.empty()) hypotheses = {scenario.cycle_rounds};
      recorder =
          recorder_report(*trace, hypotheses, scenario.detectors.options);
    }
    artifacts.detection_csv = scenario.output_dir / "detection.csv";
    artifacts.detection_json = scenario.output_dir / "detection.json";
    write_detection_artifacts(*artifacts.detection_csv,
                              *artifacts.detection_json, detection_rounds,
                              recorder);
  }

  // ---- summary.json ----
  json summary;
  summary["name"] = scenario.name;
  summary["num_clients"] = scenario.fed.num_clients;
  summary["total_rounds"] = scenario.fed.total_rounds;
  summary["master_seed"] = scenario.fed.master_seed;
  summary["noise_level"] = round9(scenario.fed.noise_level);
  summary["payload_bits"] = sent.size();
  summary["ber"] = artifacts.ber ? json(round9(*artifacts.ber)) : json(nullptr);
  summary["first_success_round"] = artifacts.first_success_round
                                       ? json(*artifacts.first_success_round)
                                       : json(nullptr);
  summary["final_global_accuracy"] = round9(artifacts.final_global_accuracy);
  summary["mean_cycle_amplitude"] = round9(artifacts.mean_cycle_amplitude);
  summary["decode_success"] = artifacts.decode_success;
  summary["sent_bits"] = sent.to_string01();
  summary["received_bits"] = sim.received.to_string01();
  if (!artifacts.sender_flag_rates.empty()) {
    json rates;
    for (const auto& [k, v] : artifacts.sender_flag_rates) rates[k] = round9(v);
    summary["sender_flag_rates"] = rates;
  }
  artifacts.summary_json = scenario.output_dir / "summary.json";
  std::ofstream sj(artifacts.summary_json);
  if (!sj) throw IoError("cannot write " + artifacts.summary_json.string());
  sj << summary.dump(2) << '\n';
  if (!sj) throw IoError("failed writing " + artifacts.summary_json.string());

  return artifacts;
}

SweepResult run_sweep(const Scenario& base, SweepAxis axis,
                      const std::vector<double>& values, int seeds) {
  if (values.empty()) throw ConfigError("run_sweep: empty axis value list");
  if (seeds < 1) throw ConfigError("run_sweep: seeds must be >= 1");

  auto axis_name = [axis]() {
    switch (axis) {
      case SweepAxis::Clients: return "clients";
      case SweepAxis::AttackerRatio: return "attacker_ratio";
      default: return "noise";
    }
  };

  SweepResult result;
  result.axis = axis;
  for (double v : values) {
    SweepPoint point;
    point.value = v;
    for (int s = 0; s < seeds; ++s) {
      Scenario run = base;
      switch (axis) {
        case SweepAxis::Clients:
          run.fed.num_clients = static_cast<int>(v);
          break;
        case SweepAxis::AttackerRatio:
          run.fed.attacker_ratio = v;
          run.fed.num_senders.reset();
          break;
        case SweepAxis::Noise:
          run.fed.noise_level = v;
          break;
      }
      run.fed.master_seed = base.fed.master_seed + static_cast<std::uint64_t>(s);
      std::ostringstream dir;
      dir << axis_name() << "=" << format_real(v) << "/seed" << s;
      run.output_dir = base.output_dir / dir.str();
      run.name = base.name + "/" + dir.str();
      point.runs.push_back(run_scenario(run));
    }
    double acc = 0.0, ber = 0.0, amp = 0.0;
    for (const auto& r : point.runs) {
      acc += r.final_global_accuracy;
      ber += r.ber.value_or(0.0);
      amp += r.mean_cycle_amplitude;
    }
    const auto n = static_cast<double>(point.runs.size());
    point.mean_final_accuracy = acc / n;
    point.mean_ber = ber / n;
    point.mean_cycle_amplitude = amp / n;
    result.points.push_back(std::move(point));
  }

  json j;
  j["axis"] = axis_name();
  j["seeds"] = seeds;
  j["points"] = json::array();
  for (const auto& p : result.points) {
    json jp;
    jp["value"] = round9(p.value);
    jp["mean_final_accuracy"] = round9(p.mean_final_accuracy);
    jp["mean_ber"] = round9(p.mean_ber);
    jp["mean_cycle_amplitude"] = round9(p.mean_cycle_amplitude);
    json runs = json::array();
    for (const auto& r : p.runs) {
      runs.push_back(
          {{"final_global_accuracy", round9(r.final_global_accuracy)},
           {"ber", r.ber ? json(round9(*r.ber)) : json(nullptr)},
           {"mean_cycle_amplitude", round9(r.mean_cycle_amplitude)},
           {"first_success_round", r.first_success_round
                                       ? json(*r.first_success_round)
                                       : json(nullptr)}});
    }
    jp["runs"] = std::move(runs);
    j["points"].push_back(std::move(jp));
  }
  std::error_code ec;
  std::filesystem::create_directories(base.output_dir, ec);
  if (ec)
    throw IoError("cannot create output directory: " + base.output_dir.string());
  result.summary_json = base.output_dir / "sweep_summary.json";
  std::ofstream out(result.summary_json);
  if (!out) throw IoError("cannot write " + result.summary_json.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + result.summary_json.string());
  return result;
}

}  // namespace fedcov
