#include "lens/json_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace lens {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& context, const char* key) {
  if (!j.is_object()) throw ValidationError(context + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(context + ": missing field '" + key + "'");
  return *it;
}

double number(const json& v, const std::string& context, const char* key) {
  if (!v.is_number()) throw ValidationError(context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

long long integer(const json& v, const std::string& context, const char* key) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
  }
  throw ValidationError(context + ": field '" + key + "' must be an integer");
}

double number_field(const json& j, const std::string& context, const char* key) {
  return number(require(j, context, key), context, key);
}

long long int_field(const json& j, const std::string& context, const char* key) {
  return integer(require(j, context, key), context, key);
}

template <class T>
T optional_int(const json& j, const std::string& context, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  const long long v = integer(*it, context, key);
  if (v < 0) throw ValidationError(context + ": field '" + key + "' must be >= 0");
  return static_cast<T>(v);
}

std::vector<int> int_list(const json& j, const std::string& context, const char* key, std::vector<int> fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_array() || it->empty()) throw ValidationError(context + ": field '" + key + "' must be a nonempty array");
  std::vector<int> out;
  for (const auto& v : *it) {
    const long long x = integer(v, context, key);
    if (x <= 0) throw ValidationError(context + ": field '" + key + "' entries must be positive");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

Shape shape_from(const json& v, const std::string& context, const char* key) {
  if (!v.is_array() || v.size() != 3) throw ValidationError(context + ": field '" + key + "' must be [H,W,C]");
  Shape s{integer(v[0], context, key), integer(v[1], context, key), integer(v[2], context, key)};
  if (s.height <= 0 || s.width <= 0 || s.channels <= 0) {
    throw ValidationError(context + ": field '" + key + "' must be positive");
  }
  return s;
}

LayerKind kind_from(const std::string& s, const std::string& context) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "pool") return LayerKind::MaxPool;
  if (s == "fc") return LayerKind::FullyConnected;
  throw ValidationError(context + ": unknown layer kind '" + s + "'");
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

json to_json(const ArchitectureSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Conv:
        layers.push_back({{"kind", "conv"}, {"k", l.kernel}, {"f", l.units}});
        break;
      case LayerKind::MaxPool:
        layers.push_back({{"kind", "pool"}});
        break;
      case LayerKind::FullyConnected:
        layers.push_back({{"kind", "fc"}, {"n", l.units}});
        break;
    }
  }
  return json{{"input", {spec.input.height, spec.input.width, spec.input.channels}},
              {"layers", std::move(layers)},
              {"classes", spec.classes}};
}

ArchitectureSpec spec_from_json(const json& j) {
  const std::string ctx = "architecture";
  ArchitectureSpec spec;
  spec.input = shape_from(require(j, ctx, "input"), ctx, "input");
  spec.classes = static_cast<int>(int_field(j, ctx, "classes"));
  if (spec.classes <= 0) throw ValidationError(ctx + ": field 'classes' must be positive");
  const json& layers = require(j, ctx, "layers");
  if (!layers.is_array() || layers.empty()) throw ValidationError(ctx + ": field 'layers' must be a nonempty array");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string lctx = ctx + ".layers[" + std::to_string(i) + "]";
    const json& l = layers[i];
    const json& kind = require(l, lctx, "kind");
    if (!kind.is_string()) throw ValidationError(lctx + ": field 'kind' must be a string");
    const bool last = i + 1 == layers.size();
    switch (kind_from(kind.get<std::string>(), lctx)) {
      case LayerKind::Conv: {
        const auto k = int_field(l, lctx, "k");
        const auto f = int_field(l, lctx, "f");
        if (k <= 0 || f <= 0) throw ValidationError(lctx + ": conv 'k' and 'f' must be positive");
        spec.layers.push_back(LayerSpec::conv(static_cast<int>(k), static_cast<int>(f)));
        break;
      }
      case LayerKind::MaxPool:
        spec.layers.push_back(LayerSpec::max_pool());
        break;
      case LayerKind::FullyConnected: {
        const auto n = int_field(l, lctx, "n");
        if (n <= 0) throw ValidationError(lctx + ": fc 'n' must be positive");
        spec.layers.push_back(
            LayerSpec::fully_connected(static_cast<int>(n), last ? Activation::Softmax : Activation::ReLU));
        break;
      }
    }
  }
  const auto& head = spec.layers.back();
  if (head.kind != LayerKind::FullyConnected || head.units != spec.classes) {
    throw ValidationError(ctx + ": last layer must be {\"kind\":\"fc\",\"n\":classes}");
  }
  return spec;
}

json to_json(const ArchitectureGenome& genome, const SearchSpace& space) {
  json blocks = json::array();
  for (const auto& b : genome.blocks) {
    blocks.push_back({{"layers", space.layer_counts.at(b.depth)},
                      {"kernel", space.kernel_sizes.at(b.kernel)},
                      {"filters", space.filter_counts.at(b.filters)},
                      {"pool", b.pool}});
  }
  json fc = json::array();
  for (const auto& f : genome.fc) {
    if (f.present) {
      fc.push_back(space.neuron_counts.at(f.neurons));
    } else {
      fc.push_back(nullptr);
    }
  }
  return json{{"blocks", std::move(blocks)}, {"fc", std::move(fc)}};
}

ArchitectureGenome genome_from_json(const json& j, const SearchSpace& space) {
  const std::string ctx = "genome";
  auto index_in = [&](const std::vector<int>& options, long long value, const std::string& where) {
    auto it = std::find(options.begin(), options.end(), value);
    if (it == options.end()) throw ValidationError(where + ": value " + std::to_string(value) + " not in search space");
    return static_cast<std::size_t>(it - options.begin());
  };
  ArchitectureGenome g;
  const json& blocks = require(j, ctx, "blocks");
  if (!blocks.is_array()) throw ValidationError(ctx + ": field 'blocks' must be an array");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string bctx = ctx + ".blocks[" + std::to_string(i) + "]";
    const json& b = blocks[i];
    const json& pool = require(b, bctx, "pool");
    if (!pool.is_boolean()) throw ValidationError(bctx + ": field 'pool' must be a boolean");
    g.blocks.push_back(BlockGene{index_in(space.layer_counts, int_field(b, bctx, "layers"), bctx + ".layers"),
                                 index_in(space.kernel_sizes, int_field(b, bctx, "kernel"), bctx + ".kernel"),
                                 index_in(space.filter_counts, int_field(b, bctx, "filters"), bctx + ".filters"),
                                 pool.get<bool>()});
  }
  const json& fc = require(j, ctx, "fc");
  if (!fc.is_array()) throw ValidationError(ctx + ": field 'fc' must be an array");
  for (std::size_t i = 0; i < fc.size(); ++i) {
    if (fc[i].is_null()) {
      g.fc.push_back(FcGene{});
    } else {
      const std::string fctx = ctx + ".fc[" + std::to_string(i) + "]";
      g.fc.push_back(FcGene{true, index_in(space.neuron_counts, integer(fc[i], fctx, "fc"), fctx)});
    }
  }
  return g;
}

json to_json(const SearchSpace& space) {
  return json{{"blocks", space.block_count},
              {"layer_counts", space.layer_counts},
              {"kernel_sizes", space.kernel_sizes},
              {"filter_counts", space.filter_counts},
              {"fc_slots", space.fc_slots},
              {"neuron_counts", space.neuron_counts},
              {"min_pools", space.min_pools},
              {"input", {space.input.height, space.input.width, space.input.channels}},
              {"classes", space.classes}};
}

SearchSpace space_from_json(const json& j) {
  const std::string ctx = "space";
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  SearchSpace s;
  s.block_count = optional_int(j, ctx, "blocks", s.block_count);
  s.layer_counts = int_list(j, ctx, "layer_counts", s.layer_counts);
  s.kernel_sizes = int_list(j, ctx, "kernel_sizes", s.kernel_sizes);
  s.filter_counts = int_list(j, ctx, "filter_counts", s.filter_counts);
  s.fc_slots = optional_int(j, ctx, "fc_slots", s.fc_slots);
  s.neuron_counts = int_list(j, ctx, "neuron_counts", s.neuron_counts);
  s.min_pools = optional_int(j, ctx, "min_pools", s.min_pools);
  if (auto it = j.find("input"); it != j.end()) s.input = shape_from(*it, ctx, "input");
  s.classes = optional_int(j, ctx, "classes", s.classes);
  if (s.block_count == 0) throw ValidationError(ctx + ": field 'blocks' must be >= 1");
  if (s.fc_slots == 0 || s.fc_slots > 16) throw ValidationError(ctx + ": field 'fc_slots' must be in [1,16]");
  if (s.min_pools > s.block_count) throw ValidationError(ctx + ": field 'min_pools' exceeds 'blocks'");
  if (s.classes <= 0) throw ValidationError(ctx + ": field 'classes' must be positive");
  return s;
}

namespace {

json predictor_table(const std::map<LayerKind, LinearPredictor>& table) {
  json out = json::object();
  for (const auto& [kind, p] : table) {
    json entry = json::object();
    entry["bias"] = p.bias;
    for (const auto& [feature, w] : p.weights) entry["per_" + feature] = w;
    out[to_string(kind)] = std::move(entry);
  }
  return out;
}

std::map<LayerKind, LinearPredictor> predictor_table_from(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ProfileError(ctx + ": expected an object keyed by layer kind");
  std::map<LayerKind, LinearPredictor> out;
  for (const auto& [kind_name, entry] : j.items()) {
    const std::string ectx = ctx + "." + kind_name;
    const LayerKind kind = kind_from(kind_name, ectx);
    if (!entry.is_object()) throw ProfileError(ectx + ": expected an object");
    LinearPredictor p;
    const auto& names = feature_names(kind);
    for (const auto& [key, value] : entry.items()) {
      if (!value.is_number()) throw ProfileError(ectx + ": field '" + key + "' must be a number");
      if (key == "bias") {
        p.bias = value.get<double>();
        continue;
      }
      if (key.rfind("per_", 0) != 0 ||
          std::find(names.begin(), names.end(), key.substr(4)) == names.end()) {
        throw ProfileError(ectx + ": unknown field '" + key + "'");
      }
      p.weights[key.substr(4)] = value.get<double>();
    }
    out[kind] = std::move(p);
  }
  return out;
}

}  // namespace

json to_json(const DeviceProfile& device) {
  return json{{"name", device.name},
              {"bytes_per_element", device.bytes_per_element},
              {"latency", predictor_table(device.latency)},
              {"power", predictor_table(device.power)}};
}

DeviceProfile device_from_json(const json& j) {
  const std::string ctx = "device";
  DeviceProfile d;
  const json& name = require(j, ctx, "name");
  if (!name.is_string()) throw ProfileError(ctx + ": field 'name' must be a string");
  d.name = name.get<std::string>();
  d.bytes_per_element = optional_int(j, ctx, "bytes_per_element", 1);
  d.latency = predictor_table_from(require(j, ctx, "latency"), ctx + ".latency");
  d.power = predictor_table_from(require(j, ctx, "power"), ctx + ".power");
  d.validate();
  return d;
}

json to_json(const WirelessProfile& w) {
  return json{{"tech", to_string(w.technology)},
              {"t_u_mbps", w.throughput_mbps},
              {"l_rt_s", w.round_trip_s},
              {"alpha_u", w.alpha_u},
              {"beta_u", w.beta_u}};
}

WirelessProfile wireless_from_json(const json& j) {
  const std::string ctx = "wireless";
  WirelessProfile w;
  const json& tech = require(j, ctx, "tech");
  if (!tech.is_string()) throw ProfileError(ctx + ": field 'tech' must be a string");
  const std::string t = lower(tech.get<std::string>());
  if (t == "wifi") {
    w.technology = Technology::WiFi;
  } else if (t == "lte") {
    w.technology = Technology::LTE;
  } else {
    throw ProfileError(ctx + ": field 'tech' must be WiFi or LTE");
  }
  w.throughput_mbps = number_field(j, ctx, "t_u_mbps");
  w.round_trip_s = number_field(j, ctx, "l_rt_s");
  w.alpha_u = number_field(j, ctx, "alpha_u");
  w.beta_u = number_field(j, ctx, "beta_u");
  w.validate();
  return w;
}

json to_json(const ProxyConstants& k) {
  return json{{"scale", k.scale},   {"a", k.a},
              {"b", k.b},           {"c", k.c},
              {"param_unit", k.param_unit}, {"jitter", k.jitter},
              {"min_error", k.min_error},   {"max_error", k.max_error},
              {"seed", k.seed}};
}

ProxyConstants proxy_constants_from_json(const json& j) {
  const std::string ctx = "proxy";
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  ProxyConstants k;
  auto opt = [&](const char* key, double& target) {
    if (auto it = j.find(key); it != j.end()) target = number(*it, ctx, key);
  };
  opt("scale", k.scale);
  opt("a", k.a);
  opt("b", k.b);
  opt("c", k.c);
  opt("param_unit", k.param_unit);
  opt("jitter", k.jitter);
  opt("min_error", k.min_error);
  opt("max_error", k.max_error);
  k.seed = optional_int<std::uint64_t>(j, ctx, "seed", 0);
  k.validate();
  return k;
}

json to_json(const DeploymentEvaluation& eval, const ArchitectureSpec& spec) {
  const std::size_t n = eval.layers.size();
  json layers = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& io = eval.sizes[i];
    const auto& c = eval.layers[i];
    layers.push_back({{"index", i},
                      {"kind", to_string(spec.layers[i].kind)},
                      {"output_shape", {io.output.height, io.output.width, io.output.channels}},
                      {"output_bytes", io.output_bytes},
                      {"latency_s", c.latency_s},
                      {"power_w", c.power_w},
                      {"energy_j", c.energy_j}});
  }
  json candidates = json::array();
  for (std::size_t k = 0; k < eval.candidates.size(); ++k) {
    const std::size_t split = eval.candidates[k];
    candidates.push_back({{"split", split},
                          {"label", split_label(split, n)},
                          {"uploaded_bytes", eval.uploaded_bytes(split)},
                          {"latency_s", eval.latency_acc[k]},
                          {"energy_j", eval.energy_acc[k]}});
  }
  return json{{"input_bytes", eval.input_bytes},
              {"layers", std::move(layers)},
              {"candidates", std::move(candidates)},
              {"index_L", eval.index_latency},
              {"index_E", eval.index_energy},
              {"label_L", split_label(eval.index_latency, n)},
              {"label_E", split_label(eval.index_energy, n)},
              {"L", eval.latency},
              {"E", eval.energy}};
}

json to_json(const DominanceMap& map) {
  auto intervals = json::array();
  for (std::size_t k = 0; k < map.winners.size(); ++k) {
    const auto& option = map.options.at(map.winners[k]);
    intervals.push_back({{"lo", k == 0 ? 0.0 : map.breakpoints[k - 1]},
                         {"hi", k < map.breakpoints.size() ? json(map.breakpoints[k]) : json(nullptr)},
                         {"option", option.label},
                         {"split", option.split}});
  }
  return json{{"metric", to_string(map.metric)}, {"wireless", to_json(map.wireless)}, {"intervals", std::move(intervals)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw Error(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(path.string() + ": rename failed: " + ec.message());
}

std::string format_double(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, r.ptr);
}

}  // namespace lens
