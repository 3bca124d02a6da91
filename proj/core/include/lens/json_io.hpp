#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lens/accuracy.hpp"
#include "lens/cost_models.hpp"
#include "lens/runtime.hpp"
#include "lens/search_space.hpp"

namespace lens {

// Architecture wire format, shared with the external trainer:
//   {"input":[H,W,C],"layers":[{"kind":"conv","k":3,"f":64},{"kind":"pool"},
//    {"kind":"fc","n":4096},...,{"kind":"fc","n":10}],"classes":10}
// The last FC entry is the softmax head and must have n == classes.
nlohmann::json to_json(const ArchitectureSpec& spec);
ArchitectureSpec spec_from_json(const nlohmann::json& j);

// Human-readable genome: option values rather than indices, null for absent FC.
//   {"blocks":[{"layers":2,"kernel":3,"filters":64,"pool":true},...],"fc":[512,null]}
nlohmann::json to_json(const ArchitectureGenome& genome, const SearchSpace& space);
ArchitectureGenome genome_from_json(const nlohmann::json& j, const SearchSpace& space);

nlohmann::json to_json(const SearchSpace& space);
SearchSpace space_from_json(const nlohmann::json& j);

// {"name":...,"bytes_per_element":1,"latency":{"conv":{"per_mac":1e-9,"bias":1e-5},...},
//  "power":{"conv":{"bias":5.0},...}}
nlohmann::json to_json(const DeviceProfile& device);
DeviceProfile device_from_json(const nlohmann::json& j);

// {"tech":"LTE","t_u_mbps":3.0,"l_rt_s":0.05,"alpha_u":0.1,"beta_u":1.0}
nlohmann::json to_json(const WirelessProfile& wireless);
WirelessProfile wireless_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProxyConstants& constants);
ProxyConstants proxy_constants_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DeploymentEvaluation& eval, const ArchitectureSpec& spec);

// {"metric":"latency","wireless":{..},"intervals":[{"lo":0,"hi":1.27,"option":"All-Edge","split":7},
//  {"lo":1.27,"hi":null,...}]}; hi is null for the unbounded last interval.
nlohmann::json to_json(const DominanceMap& map);

// Throws ValidationError naming the path on a missing file or a parse error.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace lens
