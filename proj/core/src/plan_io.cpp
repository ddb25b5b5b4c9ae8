#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "bopb/sampling.hpp"

namespace bopb {

namespace {

using nlohmann::json;

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double unhex(const json& j) {
  const auto& s = j.get_ref<const std::string&>();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::invalid_argument("plan JSON: bad float '" + s + "'");
  return x;
}

json hex_array(std::span<const double> xs) {
  json out = json::array();
  for (double x : xs) out.push_back(hex(x));
  return out;
}

std::vector<double> unhex_array(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(unhex(x));
  return out;
}

json dims_json(const DimensionSet& s) { return json(std::vector<std::uint32_t>(s.dims().begin(), s.dims().end())); }

}  // namespace

std::string plan_to_json(const SamplingPlan& plan) {
  json j;
  j["format"] = "bopb-plan-1";
  j["basis"] = plan.assign().to_string();
  j["N"] = plan.assign().N();
  j["d"] = plan.assign().d();
  j["D"] = plan.dimension();
  j["seed"] = plan.seed();
  j["partition"] = json::array();
  for (const auto& cell : plan.partition()) j["partition"].push_back(dims_json(cell));
  j["blocks"] = json::array();
  for (const auto& blk : plan.blocks()) {
    j["blocks"].push_back({{"role", blk.role == SidBlock::Role::EntryId ? "entry" : "pairing"},
                           {"stage", blk.stage},
                           {"w_dims", dims_json(blk.w_dims)},
                           {"m1", blk.m1},
                           {"m2", blk.m2},
                           {"w", hex_array(blk.w_nodes)},
                           {"z", hex_array(blk.z_nodes)}});
  }
  j["m_ce"] = plan.m_ce();
  j["ce"] = hex_array(plan.ce_nodes());
  return j.dump();
}

SamplingPlan plan_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("plan JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "bopb-plan-1") throw std::invalid_argument("plan JSON: unknown format");
    const std::size_t D = j.at("D").get<std::size_t>();
    auto assign = BasisAssignment::parse(j.at("basis").get<std::string>(), j.at("N").get<std::size_t>(),
                                         j.at("d").get<std::size_t>());
    if (assign.dimension() != D) throw std::invalid_argument("plan JSON: basis length != D");
    std::vector<DimensionSet> partition;
    for (const auto& cell : j.at("partition"))
      partition.emplace_back(D, cell.get<std::vector<std::uint32_t>>());
    std::vector<SidBlock> blocks;
    for (const auto& b : j.at("blocks")) {
      SidBlock blk;
      blk.role = b.at("role") == "entry" ? SidBlock::Role::EntryId : SidBlock::Role::Pairing;
      blk.stage = b.at("stage").get<std::size_t>();
      blk.w_dims = DimensionSet(D, b.at("w_dims").get<std::vector<std::uint32_t>>());
      blk.z_dims = blk.w_dims.complement();
      blk.m1 = b.at("m1").get<std::size_t>();
      blk.m2 = b.at("m2").get<std::size_t>();
      blk.w_nodes = unhex_array(b.at("w"));
      blk.z_nodes = unhex_array(b.at("z"));
      blocks.push_back(std::move(blk));
    }
    return SamplingPlan(std::move(assign), std::move(partition), std::move(blocks),
                        unhex_array(j.at("ce")), j.at("m_ce").get<std::size_t>(),
                        j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("plan JSON: ") + e.what());
  }
}

}  // namespace bopb
