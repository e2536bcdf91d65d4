#include "optlab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace optlab {

bool is_square_number(int n) {
  if (n < 1) return false;
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  return r * r == n;
}

void NetworkConfig::validate() const {
  std::ostringstream bad;
  if (!is_square_number(num_bs_antennas)) bad << "num_bs_antennas must be a positive square; ";
  if (!is_square_number(num_ir_elements)) bad << "num_ir_elements must be a positive square; ";
  if (num_ues < 1) bad << "num_ues must be >= 1; ";
  if (bandwidth <= 0) bad << "bandwidth must be > 0; ";
  if (carrier_freq <= 0) bad << "carrier_freq must be > 0; ";
  if (slot_duration <= 0) bad << "slot_duration must be > 0; ";
  if (slots_per_interval < 1) bad << "slots_per_interval must be >= 1; ";
  if (num_ir_elements * pilot_subphase + processing_time >= slot_duration)
    bad << "N*pilot_subphase + processing_time must fit in one slot; ";
  if (discount <= 0 || discount >= 1) bad << "discount must be in (0,1); ";
  if (num_quantiles < 1) bad << "num_quantiles must be >= 1; ";
  if (reduced_action_count < 1) bad << "reduced_action_count must be >= 1; ";
  if (ue_pos_var < 0) bad << "ue_pos_var must be >= 0; ";
  const std::string msg = bad.str();
  if (!msg.empty()) throw std::invalid_argument("config: " + msg);
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Vec3 parse_vec3(const std::string& v) {
  Vec3 out;
  std::istringstream ss(v);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) throw std::invalid_argument("expected x,y,z: " + v);
    out[i] = std::stod(trim(part));
  }
  return out;
}

std::string format_vec3(const Vec3& v) {
  std::ostringstream ss;
  ss << v[0] << "," << v[1] << "," << v[2];
  return ss.str();
}

using Setter = std::function<void(NetworkConfig&, const std::string&)>;
using Getter = std::function<std::string(const NetworkConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

const std::map<std::string, Field>& fields() {
  auto dbl = [](double NetworkConfig::* p) {
    return Field{[p](NetworkConfig& c, const std::string& v) { c.*p = std::stod(v); },
                 [p](const NetworkConfig& c) { return fmt(c.*p); }};
  };
  auto integer = [](int NetworkConfig::* p) {
    return Field{[p](NetworkConfig& c, const std::string& v) { c.*p = std::stoi(v); },
                 [p](const NetworkConfig& c) { return std::to_string(c.*p); }};
  };
  auto vec = [](Vec3 NetworkConfig::* p) {
    return Field{[p](NetworkConfig& c, const std::string& v) { c.*p = parse_vec3(v); },
                 [p](const NetworkConfig& c) { return format_vec3(c.*p); }};
  };
  static const std::map<std::string, Field> m = {
      {"num_bs_antennas", integer(&NetworkConfig::num_bs_antennas)},
      {"num_ir_elements", integer(&NetworkConfig::num_ir_elements)},
      {"num_ues", integer(&NetworkConfig::num_ues)},
      {"bandwidth", dbl(&NetworkConfig::bandwidth)},
      {"carrier_freq", dbl(&NetworkConfig::carrier_freq)},
      {"noise_psd_ue", dbl(&NetworkConfig::noise_psd_ue)},
      {"noise_psd_bs", dbl(&NetworkConfig::noise_psd_bs)},
      {"bs_power_max", dbl(&NetworkConfig::bs_power_max)},
      {"ue_pilot_power", dbl(&NetworkConfig::ue_pilot_power)},
      {"slot_duration", dbl(&NetworkConfig::slot_duration)},
      {"slots_per_interval", integer(&NetworkConfig::slots_per_interval)},
      {"pilot_subphase", dbl(&NetworkConfig::pilot_subphase)},
      {"processing_time", dbl(&NetworkConfig::processing_time)},
      {"discount", dbl(&NetworkConfig::discount)},
      {"num_quantiles", integer(&NetworkConfig::num_quantiles)},
      {"deviation_threshold", dbl(&NetworkConfig::deviation_threshold)},
      {"reduced_action_count", integer(&NetworkConfig::reduced_action_count)},
      {"bs_position", vec(&NetworkConfig::bs_position)},
      {"ir_position", vec(&NetworkConfig::ir_position)},
      {"ue_center_x", dbl(&NetworkConfig::ue_center_x)},
      {"ue_center_y", dbl(&NetworkConfig::ue_center_y)},
      {"ue_pos_var", dbl(&NetworkConfig::ue_pos_var)},
      {"shadowing_sigma_los_db", dbl(&NetworkConfig::shadowing_sigma_los_db)},
      {"shadowing_sigma_nlos_db", dbl(&NetworkConfig::shadowing_sigma_nlos_db)},
      {"direct_pl_exponent", dbl(&NetworkConfig::direct_pl_exponent)},
      {"direct_extra_loss_db", dbl(&NetworkConfig::direct_extra_loss_db)},
  };
  return m;
}

}  // namespace

NetworkConfig parse_config(const std::string& text) {
  NetworkConfig cfg;
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const NetworkConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) out << key << " = " << field.get(cfg) << "\n";
  return out.str();
}

}  // namespace optlab
