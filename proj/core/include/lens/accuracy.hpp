#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "lens/search_space.hpp"

namespace lens {

// Constants of the synthetic error proxy
//   error = scale * exp(-a * ln(1 + params / param_unit) - b * depth)
//         + c * (distinct kernel sizes - 1) + jitter * u,   u in [-1, 1]
// clamped to [min_error, max_error]. `u` is a hash of the layer skeleton
// (kinds and kernels, not widths), so widening any layer never moves it.
// The shipped values live in configs/proxy.json.
struct ProxyConstants {
  double scale = 90.0;
  double a = 0.134;
  double b = 0.0525;
  double c = 1.5;
  double param_unit = 1e6;
  double jitter = 1.0;
  double min_error = 5.0;
  double max_error = 90.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ProxyConstants&) const = default;
};

// Pure: no filesystem, clock, or global state.
double proxy_error(const ArchitectureSpec& spec, const ProxyConstants& constants = {});

// Number of conv and FC layers, classifier head included.
int weight_depth(const ArchitectureSpec& spec);

class ErrorEvaluator {
 public:
  virtual ~ErrorEvaluator() = default;
  // Test error in percent. Throws EvaluationFailed if no value is available.
  virtual double evaluate(const ArchitectureSpec& spec) = 0;
};

class ProxyEvaluator final : public ErrorEvaluator {
 public:
  explicit ProxyEvaluator(ProxyConstants constants = {}) : constants_(constants) {}
  double evaluate(const ArchitectureSpec& spec) override { return proxy_error(spec, constants_); }

 private:
  ProxyConstants constants_;
};

enum class EvaluatorMode { Proxy, External };

struct EvaluatorBinding {
  EvaluatorMode mode = EvaluatorMode::Proxy;
  std::string command;  // shell command line of the trainer worker
  double timeout_s = 3600.0;
  int epochs = 10;
  std::string dataset = "cifar10";
  std::uint64_t seed = 7;

  void validate() const;
};

class WorkerProcess;

// Client for a long-lived trainer worker speaking line-delimited JSON on its
// stdin/stdout:
//   -> {"format":1,"arch":{...},"epochs":10,"dataset":"cifar10","seed":7}
//   <- {"format":1,"test_error":31.2,"train_seconds":412.0}
//   <- {"format":1,"error":"<message>"}
// One request is in flight at a time. A worker that times out is killed and a
// fresh one is started on the next request.
class ExternalEvaluator final : public ErrorEvaluator {
 public:
  explicit ExternalEvaluator(EvaluatorBinding binding);
  ~ExternalEvaluator() override;
  ExternalEvaluator(const ExternalEvaluator&) = delete;
  ExternalEvaluator& operator=(const ExternalEvaluator&) = delete;

  double evaluate(const ArchitectureSpec& spec) override;

 private:
  EvaluatorBinding binding_;
  std::unique_ptr<WorkerProcess> worker_;
};

// Single-shot convenience: spawns a worker, sends one request, shuts it down.
double external_error(const ArchitectureSpec& spec, const EvaluatorBinding& binding);

std::unique_ptr<ErrorEvaluator> make_evaluator(const EvaluatorBinding& binding,
                                               const ProxyConstants& constants = {});

}  // namespace lens
