#include "lens/accuracy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "lens/json_io.hpp"
#include "process.hpp"

namespace lens {

void ProxyConstants::validate() const {
  if (!(scale > 0.0)) throw ValidationError("proxy: 'scale' must be positive");
  if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0)) throw ValidationError("proxy: 'a', 'b', 'c' must be >= 0");
  if (!(param_unit > 0.0)) throw ValidationError("proxy: 'param_unit' must be positive");
  if (!(jitter >= 0.0)) throw ValidationError("proxy: 'jitter' must be >= 0");
  if (!(min_error >= 0.0) || !(max_error <= 100.0) || !(min_error <= max_error)) {
    throw ValidationError("proxy: need 0 <= min_error <= max_error <= 100");
  }
}

int weight_depth(const ArchitectureSpec& spec) {
  return static_cast<int>(std::count_if(spec.layers.begin(), spec.layers.end(),
                                        [](const LayerSpec& l) { return l.kind != LayerKind::MaxPool; }));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1], keyed on layer kinds and conv kernels only.
double skeleton_jitter(const ArchitectureSpec& spec, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull ^ splitmix64(seed);
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const auto& l : spec.layers) {
    mix(static_cast<std::uint64_t>(l.kind) + 1);
    if (l.kind == LayerKind::Conv) mix(static_cast<std::uint64_t>(l.kernel));
  }
  const double unit = static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
  return 2.0 * unit - 1.0;
}

}  // namespace

double proxy_error(const ArchitectureSpec& spec, const ProxyConstants& k) {
  const auto params = static_cast<double>(parameter_count(spec));
  const double depth = weight_depth(spec);
  std::set<int> kernels;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::Conv) kernels.insert(l.kernel);
  }
  const double diversity = kernels.empty() ? 0.0 : static_cast<double>(kernels.size() - 1);

  const double base = k.scale * std::exp(-k.a * std::log1p(params / k.param_unit) - k.b * depth);
  const double error = base + k.c * diversity + k.jitter * skeleton_jitter(spec, k.seed);
  return std::clamp(error, k.min_error, k.max_error);
}

void EvaluatorBinding::validate() const {
  if (mode == EvaluatorMode::External && command.empty()) {
    throw ValidationError("evaluator: external mode requires a trainer command");
  }
  if (!(timeout_s > 0.0)) throw ValidationError("evaluator: timeout must be positive");
  if (epochs < 1) throw ValidationError("evaluator: epochs must be >= 1");
}

ExternalEvaluator::ExternalEvaluator(EvaluatorBinding binding) : binding_(std::move(binding)) {
  binding_.validate();
  if (binding_.mode != EvaluatorMode::External) throw ValidationError("ExternalEvaluator needs an external binding");
}

ExternalEvaluator::~ExternalEvaluator() = default;

double ExternalEvaluator::evaluate(const ArchitectureSpec& spec) {
  if (!worker_ || !worker_->running()) worker_ = std::make_unique<WorkerProcess>(binding_.command);

  const nlohmann::json request{{"format", 1},
                               {"arch", to_json(spec)},
                               {"epochs", binding_.epochs},
                               {"dataset", binding_.dataset},
                               {"seed", binding_.seed}};
  if (!worker_->write_line(request.dump())) {
    const int code = worker_->wait_exit(std::chrono::milliseconds(500));
    worker_.reset();
    throw EvaluationFailed("trainer closed its input (exit status " + std::to_string(code) + ")");
  }

  std::string line;
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(std::ceil(binding_.timeout_s * 1000.0)));
  switch (worker_->read_line(line, timeout)) {
    case WorkerProcess::ReadStatus::Line:
      break;
    case WorkerProcess::ReadStatus::Timeout:
      worker_->kill();
      worker_.reset();
      throw EvaluationFailed("trainer did not respond within " + format_double(binding_.timeout_s) + " s", line);
    case WorkerProcess::ReadStatus::Closed: {
      int code = worker_->wait_exit(std::chrono::milliseconds(1000));
      if (code < 0) worker_->kill();
      worker_.reset();
      throw EvaluationFailed("trainer exited with status " + std::to_string(code) + " before responding", line);
    }
  }

  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("malformed trainer response", line);
  }
  if (!response.is_object()) throw ProtocolError("trainer response is not a JSON object", line);
  // A missing "format" is read as version 1; minimal stubs omit it.
  if (auto it = response.find("format"); it != response.end() && *it != 1) {
    throw ProtocolError("trainer response has unsupported 'format' " + it->dump(), line);
  }
  if (auto it = response.find("error"); it != response.end()) {
    throw EvaluationFailed("trainer reported: " + (it->is_string() ? it->get<std::string>() : it->dump()), line);
  }
  auto it = response.find("test_error");
  if (it == response.end() || !it->is_number()) throw ProtocolError("trainer response lacks numeric 'test_error'", line);
  const double error = it->get<double>();
  if (!(error >= 0.0 && error <= 100.0)) throw ProtocolError("trainer test_error out of range [0,100]", line);
  return error;
}

double external_error(const ArchitectureSpec& spec, const EvaluatorBinding& binding) {
  ExternalEvaluator evaluator(binding);
  return evaluator.evaluate(spec);
}

std::unique_ptr<ErrorEvaluator> make_evaluator(const EvaluatorBinding& binding, const ProxyConstants& constants) {
  binding.validate();
  if (binding.mode == EvaluatorMode::External) return std::make_unique<ExternalEvaluator>(binding);
  constants.validate();
  return std::make_unique<ProxyEvaluator>(constants);
}

}  // namespace lens
