#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "psym/network.hpp"
#include "psym/training.hpp"

namespace psym {

using json = nlohmann::json;

// %.17g: shortest fixed formatting that round-trips IEEE doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(std::span<const char>(s.data(), s.size()))));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

// --------------------------------------------------------------------------
// Dataset: CSV with header y0_1..y0_{2d},y1_1..y1_{2d} plus a JSON sidecar
// carrying the generation metadata.
// --------------------------------------------------------------------------

inline std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream out;
  const int dim = ds.dim();
  for (int k = 1; k <= dim; ++k) out << "y0_" << k << ",";
  for (int k = 1; k <= dim; ++k) out << "y1_" << k << (k == dim ? "" : ",");
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int k = 0; k < dim; ++k) out << format_double(ds.y0[i][k]) << ",";
    for (int k = 0; k < dim; ++k)
      out << format_double(ds.y1[i][k]) << (k == dim - 1 ? "" : ",");
    out << "\n";
  }
  return out.str();
}

inline json dataset_meta_to_json(const Dataset& ds) {
  json region = json::array();
  for (const auto& [lo, hi] : ds.meta.region) region.push_back({lo, hi});
  return json{{"system_name", ds.meta.system_name},
              {"half_dim", ds.half_dim},
              {"n", ds.size()},
              {"interval", ds.meta.interval},
              {"h_gen", ds.meta.h_gen},
              {"seed", ds.meta.seed},
              {"region", region}};
}

inline void write_dataset(const Dataset& ds, const std::string& csv_path,
                          const std::string& meta_path) {
  write_file(csv_path, dataset_to_csv(ds));
  write_file(meta_path, dataset_meta_to_json(ds).dump(2) + "\n");
}

inline Dataset read_dataset(const std::string& csv_path, const std::string& meta_path) {
  const json meta = json::parse(read_file(meta_path));
  Dataset ds;
  ds.half_dim = meta.at("half_dim").get<int>();
  ds.meta.system_name = meta.at("system_name").get<std::string>();
  ds.meta.interval = meta.at("interval").get<double>();
  ds.meta.h_gen = meta.at("h_gen").get<double>();
  ds.meta.seed = meta.at("seed").get<std::uint64_t>();
  for (const auto& pair : meta.at("region"))
    ds.meta.region.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());

  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset csv");
  const int dim = ds.dim();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != static_cast<std::size_t>(2 * dim))
      throw std::runtime_error("dataset row has wrong arity");
    ds.y0.emplace_back(values.begin(), values.begin() + dim);
    ds.y1.emplace_back(values.begin() + dim, values.end());
  }
  return ds;
}

// --------------------------------------------------------------------------
// Checkpoint: one JSON document holding the architecture, flat weights
// grouped by role, the training configuration and the seed.
// --------------------------------------------------------------------------

inline json activation_to_json(const ActivationKind& kind) {
  json j{{"kind", to_string(kind.type)}};
  switch (kind.type) {
    case ActivationType::Pade:
      j["degrees"] = {kind.num_degree, kind.den_degree};
      j["fixed_denominator"] = kind.fixed_denominator;
      break;
    case ActivationType::Pau:
      j["degrees"] = {kind.num_degree, kind.den_degree};
      break;
    default:
      j["degrees"] = json::array();
      break;
  }
  return j;
}

inline ActivationKind activation_from_json(const json& j) {
  const ActivationType type = activation_type_from_string(j.at("kind").get<std::string>());
  switch (type) {
    case ActivationType::Pade:
      return ActivationKind::pade(j.at("degrees").at(0).get<int>(),
                                  j.at("degrees").at(1).get<int>(),
                                  j.at("fixed_denominator").get<std::vector<double>>());
    case ActivationType::Pau:
      return ActivationKind::pau(j.at("degrees").at(0).get<int>(),
                                 j.at("degrees").at(1).get<int>());
    case ActivationType::Taylor:
      return ActivationKind::taylor();
    case ActivationType::Relu:
      return ActivationKind::relu();
  }
  throw std::logic_error("unreachable");
}

inline json train_config_to_json(const TrainConfig& cfg) {
  return json{{"h", cfg.h},
              {"K", cfg.steps_per_pair},
              {"epochs", cfg.epochs},
              {"lr", cfg.adam.lr},
              {"beta1", cfg.adam.beta1},
              {"beta2", cfg.adam.beta2},
              {"eps", cfg.adam.eps},
              {"width", cfg.width},
              {"summands", cfg.summands},
              {"activation", activation_to_json(cfg.kind)},
              {"seed", cfg.seed}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  cfg.h = j.at("h").get<double>();
  cfg.steps_per_pair = j.at("K").get<int>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.adam.lr = j.at("lr").get<double>();
  cfg.adam.beta1 = j.at("beta1").get<double>();
  cfg.adam.beta2 = j.at("beta2").get<double>();
  cfg.adam.eps = j.at("eps").get<double>();
  cfg.width = j.at("width").get<int>();
  cfg.summands = j.at("summands").get<int>();
  cfg.kind = activation_from_json(j.at("activation"));
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

inline json checkpoint_to_json(const GradientNet& net, const std::string& system_name,
                               const TrainConfig& cfg) {
  json a = json::array(), b = json::array(), act = json::array();
  const std::span<const double> th(net.theta);
  for (int i = 0; i < net.summands; ++i) {
    const auto ai = th.subspan(net.a_offset(i), net.matrix_size());
    const auto bi = th.subspan(net.b_offset(i), net.matrix_size());
    a.push_back(std::vector<double>(ai.begin(), ai.end()));
    b.push_back(std::vector<double>(bi.begin(), bi.end()));
    const auto pi = th.subspan(net.act_offset(i), net.kind.params_per_summand());
    act.push_back(std::vector<double>(pi.begin(), pi.end()));
  }
  const auto bias = th.subspan(net.bias_offset(), net.dim());
  return json{{"schema_version", 1},
              {"system_name", system_name},
              {"d", net.half_dim},
              {"l", net.width},
              {"S", net.summands},
              {"activation", activation_to_json(net.kind)},
              {"weights",
               {{"A", a},
                {"B", b},
                {"b", std::vector<double>(bias.begin(), bias.end())},
                {"activation_params", act}}},
              {"train_config", train_config_to_json(cfg)},
              {"seed", cfg.seed}};
}

struct Checkpoint {
  GradientNet net;
  std::string system_name;
  TrainConfig config;
};

inline Checkpoint checkpoint_from_json(const json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint schema version");
  Checkpoint cp;
  cp.system_name = j.at("system_name").get<std::string>();
  cp.config = train_config_from_json(j.at("train_config"));
  GradientNet& net = cp.net;
  net.half_dim = j.at("d").get<int>();
  net.width = j.at("l").get<int>();
  net.summands = j.at("S").get<int>();
  net.kind = activation_from_json(j.at("activation"));
  net.theta.assign(net.param_count(), 0.0);
  const json& w = j.at("weights");
  for (int i = 0; i < net.summands; ++i) {
    const auto ai = w.at("A").at(i).get<std::vector<double>>();
    const auto bi = w.at("B").at(i).get<std::vector<double>>();
    const auto pi = w.at("activation_params").at(i).get<std::vector<double>>();
    if (ai.size() != net.matrix_size() || bi.size() != net.matrix_size() ||
        pi.size() != static_cast<std::size_t>(net.kind.params_per_summand()))
      throw std::runtime_error("checkpoint weight shapes do not match the architecture");
    std::copy(ai.begin(), ai.end(), net.theta.begin() + net.a_offset(i));
    std::copy(bi.begin(), bi.end(), net.theta.begin() + net.b_offset(i));
    std::copy(pi.begin(), pi.end(), net.theta.begin() + net.act_offset(i));
  }
  const auto bias = w.at("b").get<std::vector<double>>();
  if (bias.size() != static_cast<std::size_t>(net.dim()))
    throw std::runtime_error("checkpoint bias shape does not match the architecture");
  std::copy(bias.begin(), bias.end(), net.theta.begin() + net.bias_offset());
  return cp;
}

inline void write_checkpoint(const GradientNet& net, const std::string& system_name,
                             const TrainConfig& cfg, const std::string& path) {
  write_file(path, checkpoint_to_json(net, system_name, cfg).dump(2) + "\n");
}

inline Checkpoint read_checkpoint(const std::string& path) {
  return checkpoint_from_json(json::parse(read_file(path)));
}

// --------------------------------------------------------------------------
// Tabular series.
// --------------------------------------------------------------------------

inline std::string history_to_csv(std::span<const double> history) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    out << (e + 1) << "," << format_double(history[e]) << "\n";
  return out.str();
}

inline std::string curve_to_csv(std::span<const double> t, std::span<const double> v,
                                const std::string& value_header = "value") {
  std::ostringstream out;
  out << "t," << value_header << "\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    out << format_double(t[i]) << "," << format_double(v[i]) << "\n";
  return out.str();
}

// h,residual_or_error rows followed by a fitted-slope summary line.
inline std::string order_fit_to_csv(std::span<const double> steps,
                                    std::span<const double> errors, double slope) {
  std::ostringstream out;
  out << "h,residual_or_error\n";
  for (std::size_t i = 0; i < steps.size(); ++i)
    out << format_double(steps[i]) << "," << format_double(errors[i]) << "\n";
  out << "# slope," << format_double(slope) << "\n";
  return out.str();
}

}  // namespace psym
