#include "lens/search_space.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

namespace lens {

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv:
      return "conv";
    case LayerKind::MaxPool:
      return "pool";
    case LayerKind::FullyConnected:
      return "fc";
  }
  return "unknown";
}

LayerSpec LayerSpec::conv(int kernel, int filters) {
  return LayerSpec{LayerKind::Conv, kernel, filters, 1, true, Activation::ReLU};
}

LayerSpec LayerSpec::max_pool() {
  return LayerSpec{LayerKind::MaxPool, 2, 0, 2, false, Activation::None};
}

LayerSpec LayerSpec::fully_connected(int neurons, Activation act) {
  return LayerSpec{LayerKind::FullyConnected, 0, neurons, 1, false, act};
}

ArchitectureGenome ArchitectureGenome::canonical() const {
  ArchitectureGenome out = *this;
  for (auto& slot : out.fc) {
    if (!slot.present) slot.neurons = 0;
  }
  return out;
}

std::size_t GenomeHash::operator()(const ArchitectureGenome& genome) const noexcept {
  // FNV-1a over the canonical option indices.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const auto& b : genome.blocks) {
    mix(b.depth);
    mix(b.kernel);
    mix(b.filters);
    mix(b.pool ? 1 : 0);
  }
  mix(0xff);
  for (const auto& f : genome.fc) {
    mix(f.present ? 1 : 0);
    mix(f.present ? f.neurons : 0);
  }
  return static_cast<std::size_t>(h);
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  os << "invalid genome:";
  for (const auto& v : violations) os << " [" << v.code << "] " << v.message << ";";
  return os.str();
}

void check_space(const SearchSpace& space) {
  if (space.layer_counts.empty() || space.kernel_sizes.empty() || space.filter_counts.empty() ||
      space.neuron_counts.empty()) {
    throw ValidationError("search space: every option list must be nonempty");
  }
  if (space.block_count == 0) throw ValidationError("search space: block_count must be >= 1");
  if (space.fc_slots == 0 || space.fc_slots > 16) {
    throw ValidationError("search space: fc_slots must be in [1, 16]");
  }
  if (space.min_pools > space.block_count) {
    throw ValidationError("search space: min_pools exceeds block_count");
  }
  if (space.input.elements() <= 0) throw ValidationError("search space: input shape must be positive");
  if (space.classes <= 0) throw ValidationError("search space: classes must be positive");
}

}  // namespace

GenomeValidationError::GenomeValidationError(std::vector<Violation> violations)
    : ValidationError(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate(const ArchitectureGenome& genome, const SearchSpace& space) {
  std::vector<Violation> out;
  if (genome.blocks.size() != space.block_count) {
    out.push_back({"block-count", "expected " + std::to_string(space.block_count) + " blocks, got " +
                                      std::to_string(genome.blocks.size())});
  }
  if (genome.fc.size() != space.fc_slots) {
    out.push_back({"fc-slot-count", "expected " + std::to_string(space.fc_slots) +
                                        " FC slots, got " + std::to_string(genome.fc.size())});
  }

  std::size_t pools = 0;
  for (std::size_t i = 0; i < genome.blocks.size(); ++i) {
    const auto& b = genome.blocks[i];
    const std::string where = "block " + std::to_string(i);
    if (b.depth >= space.layer_counts.size()) {
      out.push_back({"depth-index", where + " layer-count index out of range"});
    }
    if (b.kernel >= space.kernel_sizes.size()) {
      out.push_back({"kernel-index", where + " kernel index out of range"});
    }
    if (b.filters >= space.filter_counts.size()) {
      out.push_back({"filter-index", where + " filter index out of range"});
    }
    if (b.pool) ++pools;
  }
  if (pools < space.min_pools) {
    out.push_back({"pool-count", "at least " + std::to_string(space.min_pools) +
                                     " pooling layers required, got " + std::to_string(pools)});
  }

  bool any_fc = false;
  for (std::size_t i = 0; i < genome.fc.size(); ++i) {
    if (!genome.fc[i].present) continue;
    any_fc = true;
    if (genome.fc[i].neurons >= space.neuron_counts.size()) {
      out.push_back({"neuron-index", "FC slot " + std::to_string(i) + " neuron index out of range"});
    }
  }
  if (!any_fc) out.push_back({"fc-presence", "at least one FC layer must be present"});
  return out;
}

ArchitectureSpec decode(const ArchitectureGenome& genome, const SearchSpace& space) {
  if (auto violations = validate(genome, space); !violations.empty()) {
    throw GenomeValidationError(std::move(violations));
  }
  ArchitectureSpec spec;
  spec.input = space.input;
  spec.classes = space.classes;
  for (const auto& b : genome.blocks) {
    const int depth = space.layer_counts[b.depth];
    for (int i = 0; i < depth; ++i) {
      spec.layers.push_back(LayerSpec::conv(space.kernel_sizes[b.kernel], space.filter_counts[b.filters]));
    }
    if (b.pool) spec.layers.push_back(LayerSpec::max_pool());
  }
  for (const auto& f : genome.fc) {
    if (f.present) spec.layers.push_back(LayerSpec::fully_connected(space.neuron_counts[f.neurons]));
  }
  spec.layers.push_back(LayerSpec::fully_connected(space.classes, Activation::Softmax));
  return spec;
}

namespace {

std::optional<std::size_t> index_of(const std::vector<int>& options, int value) {
  auto it = std::find(options.begin(), options.end(), value);
  if (it == options.end()) return std::nullopt;
  return static_cast<std::size_t>(it - options.begin());
}

}  // namespace

ArchitectureGenome read_genome(const ArchitectureSpec& spec, const SearchSpace& space) {
  check_space(space);
  if (spec.input != space.input) throw ValidationError("architecture input shape differs from search space");
  if (spec.classes != space.classes) throw ValidationError("architecture class count differs from search space");
  const auto& layers = spec.layers;
  if (layers.empty() || layers.back().kind != LayerKind::FullyConnected ||
      layers.back().units != spec.classes) {
    throw ValidationError("architecture must end with an FC classifier head of `classes` outputs");
  }

  // Convolutional prefix ends at the first FC layer.
  std::size_t conv_end = 0;
  while (conv_end < layers.size() && layers[conv_end].kind != LayerKind::FullyConnected) ++conv_end;

  ArchitectureGenome genome;
  genome.blocks.resize(space.block_count);

  // Backtracking parse: a run of identical convs can straddle an unpooled block
  // boundary, so the split into blocks is searched rather than read greedily.
  std::function<bool(std::size_t, std::size_t)> parse = [&](std::size_t block, std::size_t pos) -> bool {
    if (block == space.block_count) return pos == conv_end;
    if (pos >= conv_end || layers[pos].kind != LayerKind::Conv) return false;
    const auto& first = layers[pos];
    auto k = index_of(space.kernel_sizes, first.kernel);
    auto f = index_of(space.filter_counts, first.units);
    if (!k || !f) return false;
    for (std::size_t d = 0; d < space.layer_counts.size(); ++d) {
      const auto depth = static_cast<std::size_t>(space.layer_counts[d]);
      if (pos + depth > conv_end) continue;
      bool same = true;
      for (std::size_t i = pos; i < pos + depth; ++i) {
        const auto& l = layers[i];
        if (l.kind != LayerKind::Conv || l.kernel != first.kernel || l.units != first.units) {
          same = false;
          break;
        }
      }
      if (!same) continue;
      std::size_t next = pos + depth;
      const bool pooled = next < conv_end && layers[next].kind == LayerKind::MaxPool;
      if (pooled) ++next;
      genome.blocks[block] = BlockGene{d, *k, *f, pooled};
      if (parse(block + 1, next)) return true;
    }
    return false;
  };
  if (!parse(0, 0)) {
    throw ValidationError("convolutional layers do not match " + std::to_string(space.block_count) +
                          " blocks of the search space");
  }

  const std::size_t fc_count = layers.size() - 1 - conv_end;
  if (fc_count > space.fc_slots) throw ValidationError("too many FC layers for the search space");
  genome.fc.assign(space.fc_slots, FcGene{});
  for (std::size_t i = 0; i < fc_count; ++i) {
    const auto& l = layers[conv_end + i];
    auto n = index_of(space.neuron_counts, l.units);
    if (l.kind != LayerKind::FullyConnected || !n) {
      throw ValidationError("FC layer " + std::to_string(conv_end + i) + " has unsupported width");
    }
    genome.fc[i] = FcGene{true, *n};
  }
  if (auto violations = validate(genome, space); !violations.empty()) {
    throw GenomeValidationError(std::move(violations));
  }
  return genome;
}

std::vector<LayerIO> compute_sizes(const ArchitectureSpec& spec, int bytes_per_element) {
  if (bytes_per_element <= 0) throw ValidationError("bytes_per_element must be positive");
  if (spec.input.height <= 0 || spec.input.width <= 0 || spec.input.channels <= 0) {
    throw ValidationError("input shape must be positive in every dimension");
  }
  if (spec.layers.empty()) throw ValidationError("architecture has no layers");
  if (spec.layers.back().kind != LayerKind::FullyConnected) {
    throw ShapeError(spec.layers.size() - 1, "final layer must be fully connected");
  }

  std::vector<LayerIO> out;
  out.reserve(spec.layers.size());
  Shape current = spec.input;
  bool flattened = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    Shape next;
    switch (layer.kind) {
      case LayerKind::Conv: {
        if (flattened) throw ShapeError(i, "conv layer after a fully connected layer");
        if (layer.kernel <= 0 || layer.units <= 0 || layer.stride <= 0) {
          throw ShapeError(i, "conv layer needs positive kernel, filters and stride");
        }
        auto extent = [&](std::int64_t in) -> std::int64_t {
          if (layer.same_padding) return (in + layer.stride - 1) / layer.stride;
          return in < layer.kernel ? 0 : (in - layer.kernel) / layer.stride + 1;
        };
        next = Shape{extent(current.height), extent(current.width), layer.units};
        if (next.height <= 0 || next.width <= 0) throw ShapeError(i, "conv kernel larger than its input");
        break;
      }
      case LayerKind::MaxPool:
        if (flattened) throw ShapeError(i, "pool layer after a fully connected layer");
        next = Shape{(current.height + 1) / 2, (current.width + 1) / 2, current.channels};
        break;
      case LayerKind::FullyConnected:
        if (layer.units <= 0) throw ShapeError(i, "FC layer needs a positive neuron count");
        next = Shape{1, 1, layer.units};
        flattened = true;
        break;
    }
    const std::int64_t elements = next.elements();
    out.push_back(LayerIO{current, next, elements, elements * bytes_per_element});
    current = next;
  }
  return out;
}

ArchitectureGenome sample_random(const SearchSpace& space, std::mt19937_64& rng) {
  check_space(space);
  auto uniform = [&rng](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };

  ArchitectureGenome g;
  g.blocks.resize(space.block_count);
  for (auto& b : g.blocks) {
    b.depth = uniform(space.layer_counts.size());
    b.kernel = uniform(space.kernel_sizes.size());
    b.filters = uniform(space.filter_counts.size());
  }

  // Rejection on the pooling pattern: each flag is a fair coin, patterns with
  // too few pools are redrawn.
  for (;;) {
    std::size_t pools = 0;
    for (auto& b : g.blocks) {
      b.pool = uniform(2) == 1;
      pools += b.pool ? 1 : 0;
    }
    if (pools >= space.min_pools) break;
  }

  // FC slots: draw uniformly over canonical configurations, i.e. each nonempty
  // presence subset weighted by the number of neuron assignments it admits.
  const std::size_t slots = space.fc_slots;
  const std::size_t options = space.neuron_counts.size();
  std::vector<std::uint64_t> weights(std::size_t{1} << slots, 0);
  std::uint64_t total = 0;
  for (std::size_t mask = 1; mask < weights.size(); ++mask) {
    std::uint64_t w = 1;
    for (std::size_t s = 0; s < slots; ++s) {
      if (mask & (std::size_t{1} << s)) w *= options;
    }
    weights[mask] = w;
    total += w;
  }
  std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, total - 1)(rng);
  std::size_t mask = 1;
  for (; mask < weights.size(); ++mask) {
    if (r < weights[mask]) break;
    r -= weights[mask];
  }
  g.fc.assign(slots, FcGene{});
  for (std::size_t s = 0; s < slots; ++s) {
    if (mask & (std::size_t{1} << s)) g.fc[s] = FcGene{true, uniform(options)};
  }
  return g;
}

ArchitectureGenome sample_random(const SearchSpace& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_random(space, rng);
}

ArchitectureGenome minimal_genome(const SearchSpace& space) {
  check_space(space);
  ArchitectureGenome g;
  g.blocks.assign(space.block_count, BlockGene{0, 0, 0, true});
  g.fc.assign(space.fc_slots, FcGene{});
  g.fc[0] = FcGene{true, 0};
  return g;
}

std::int64_t parameter_count(const ArchitectureSpec& spec) {
  const auto ios = compute_sizes(spec);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const auto& io = ios[i];
    switch (l.kind) {
      case LayerKind::Conv:
        total += std::int64_t{l.kernel} * l.kernel * io.input.channels * l.units + l.units;
        break;
      case LayerKind::FullyConnected:
        total += io.input.elements() * l.units + l.units;
        break;
      case LayerKind::MaxPool:
        break;
    }
  }
  return total;
}

}  // namespace lens
