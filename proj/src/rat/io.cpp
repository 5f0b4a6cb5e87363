#include "mipreg/rat/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace mipreg::rat {

using nlohmann::json;

namespace {

json channel_json(const ChannelConfig& c) {
  return {{"radius", c.radius},
          {"pathloss_exponent", c.pathloss_exponent},
          {"bandwidth", c.bandwidth},
          {"noise_dbm_per_hz", c.noise_dbm_per_hz},
          {"power_dbm", c.power_dbm},
          {"min_distance", c.min_distance},
          {"rayleigh_sigma", c.rayleigh_sigma}};
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw FormatError(fmt::format("instance: missing field '{}'", name));
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("instance: field '{}' has the wrong type ({})", name, e.what()));
  }
}

int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

std::string to_json(const RatInstance& inst) {
  json j;
  j["I"] = inst.I;
  j["K"] = inst.K;
  j["rat_of"] = inst.rat_of;
  json rows = json::array();
  for (int i = 0; i < inst.I; ++i) {
    std::vector<double> row(static_cast<std::size_t>(inst.K));
    for (int k = 0; k < inst.K; ++k) row[static_cast<std::size_t>(k)] = inst.rate(i, k);
    rows.push_back(row);
  }
  j["rate"] = rows;
  j["alpha"] = std::vector<double>(inst.alpha.data(), inst.alpha.data() + inst.alpha.size());
  j["n_max"] = inst.n_max;
  j["w_max"] = inst.w_max;
  j["k_max"] = inst.k_max;
  if (inst.channel) j["channel"] = channel_json(*inst.channel);
  if (inst.seed) j["seed"] = *inst.seed;
  return j.dump(2) + "\n";
}

RatInstance from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(fmt::format("instance: syntax error on line {}: {}", line_of(text, e.byte), e.what()));
  }
  if (!j.is_object()) throw FormatError("instance: top level must be an object");

  RatInstance inst;
  inst.I = field<int>(j, "I");
  inst.K = field<int>(j, "K");
  inst.rat_of = field<std::vector<int>>(j, "rat_of");
  const auto rows = field<std::vector<std::vector<double>>>(j, "rate");
  if (inst.I < 1 || inst.K < 1) throw FormatError("instance: I and K must be positive");
  if (static_cast<int>(rows.size()) != inst.I) {
    throw FormatError(fmt::format("instance: field 'rate' has {} rows, expected I = {}", rows.size(), inst.I));
  }
  inst.rate.resize(inst.I, inst.K);
  for (int i = 0; i < inst.I; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != inst.K) {
      throw FormatError(fmt::format("instance: field 'rate' row {} has {} entries, expected K = {}", i, row.size(), inst.K));
    }
    for (int k = 0; k < inst.K; ++k) inst.rate(i, k) = row[static_cast<std::size_t>(k)];
  }
  const auto alpha = field<std::vector<double>>(j, "alpha");
  inst.alpha = Eigen::Map<const Vec>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  inst.n_max = field<std::array<int, 2>>(j, "n_max");
  inst.w_max = field<std::array<double, 2>>(j, "w_max");
  inst.k_max = field<std::vector<int>>(j, "k_max");
  if (j.contains("channel")) {
    const json& c = j["channel"];
    ChannelConfig cc;
    cc.radius = field<double>(c, "radius");
    cc.pathloss_exponent = field<double>(c, "pathloss_exponent");
    cc.bandwidth = field<double>(c, "bandwidth");
    cc.noise_dbm_per_hz = field<double>(c, "noise_dbm_per_hz");
    cc.power_dbm = field<double>(c, "power_dbm");
    cc.min_distance = field<double>(c, "min_distance");
    cc.rayleigh_sigma = field<double>(c, "rayleigh_sigma");
    inst.channel = cc;
  }
  if (j.contains("seed")) inst.seed = field<std::uint64_t>(j, "seed");

  try {
    inst.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return inst;
}

void save_instance(const RatInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << to_json(inst);
}

RatInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot read instance file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace mipreg::rat
