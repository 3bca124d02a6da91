#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lens/errors.hpp"

namespace lens {

struct Shape {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::int64_t channels = 0;

  std::int64_t elements() const noexcept { return height * width * channels; }
  bool operator==(const Shape&) const = default;
};

enum class LayerKind { Conv, MaxPool, FullyConnected };
enum class Activation { None, ReLU, Softmax };

const char* to_string(LayerKind kind) noexcept;

// One executable layer. Batch-norm and activations are fused into their host
// layer and never appear as separate entries.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  int kernel = 0;  // conv only
  int units = 0;   // filters for conv, neurons for FC, 0 for pool
  int stride = 1;
  bool same_padding = false;
  Activation activation = Activation::None;

  static LayerSpec conv(int kernel, int filters);
  static LayerSpec max_pool();
  static LayerSpec fully_connected(int neurons, Activation act = Activation::ReLU);

  bool operator==(const LayerSpec&) const = default;
};

struct ArchitectureSpec {
  Shape input;
  std::vector<LayerSpec> layers;  // includes the softmax classifier head
  int classes = 0;

  bool operator==(const ArchitectureSpec&) const = default;
};

struct LayerIO {
  Shape input;
  Shape output;
  std::int64_t output_elements = 0;
  std::int64_t output_bytes = 0;
};

// Option lists and structural constraints of the VGG-derived space.
// Defaults reproduce the reference configuration: 5 blocks, >=4 pools,
// one or two optional FC layers ahead of the classifier.
struct SearchSpace {
  std::vector<int> layer_counts{1, 2, 3};
  std::vector<int> kernel_sizes{3, 5, 7};
  std::vector<int> filter_counts{24, 36, 64, 96, 128, 256};
  std::vector<int> neuron_counts{256, 512, 1024, 2048, 4096, 8192};
  std::size_t block_count = 5;
  std::size_t fc_slots = 2;
  std::size_t min_pools = 4;
  Shape input{224, 224, 3};
  int classes = 10;

  bool operator==(const SearchSpace&) const = default;
};

// Option indices for one convolutional block.
struct BlockGene {
  std::size_t depth = 0;
  std::size_t kernel = 0;
  std::size_t filters = 0;
  bool pool = true;

  bool operator==(const BlockGene&) const = default;
};

struct FcGene {
  bool present = false;
  std::size_t neurons = 0;  // ignored when absent; canonical form stores 0

  bool operator==(const FcGene&) const = default;
};

struct ArchitectureGenome {
  std::vector<BlockGene> blocks;
  std::vector<FcGene> fc;

  // Zeroes the neuron index of absent FC slots so that equal architectures
  // compare equal.
  ArchitectureGenome canonical() const;

  bool operator==(const ArchitectureGenome&) const = default;
};

struct GenomeHash {
  std::size_t operator()(const ArchitectureGenome& genome) const noexcept;
};

struct Violation {
  std::string code;
  std::string message;
};

class GenomeValidationError : public ValidationError {
 public:
  explicit GenomeValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Every violated constraint, not just the first. Codes: "block-count",
// "fc-slot-count", "depth-index", "kernel-index", "filter-index",
// "neuron-index", "pool-count", "fc-presence".
std::vector<Violation> validate(const ArchitectureGenome& genome, const SearchSpace& space);

// Layer order: block 1..N (conv x depth, optional pool), present FC layers,
// then the softmax head with `space.classes` outputs.
ArchitectureSpec decode(const ArchitectureGenome& genome, const SearchSpace& space);

// Inverse of decode: reads the structural choices back out of a spec.
// Throws ValidationError if the spec is not expressible in `space`.
ArchitectureGenome read_genome(const ArchitectureSpec& spec, const SearchSpace& space);

// Per-layer tensor shapes. Throws ShapeError naming the first inconsistent layer.
std::vector<LayerIO> compute_sizes(const ArchitectureSpec& spec, int bytes_per_element = 1);

// Uniform over canonical valid genomes.
ArchitectureGenome sample_random(const SearchSpace& space, std::mt19937_64& rng);
ArchitectureGenome sample_random(const SearchSpace& space, std::uint64_t seed);

// Smallest valid genome: every choice at option index 0, all pools, FC slot 0 only.
ArchitectureGenome minimal_genome(const SearchSpace& space);

std::int64_t parameter_count(const ArchitectureSpec& spec);

}  // namespace lens
