#pragma once

// Repeated-trial runner: sample → estimate across R trials, relative RMSE
// and bias against the naive plug-in estimate, parameter sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "debias/debias.hpp"
#include "debias/error.hpp"
#include "debias/numeric.hpp"
#include "debias/problems.hpp"
#include "debias/random.hpp"

namespace debias {

/// What a method sees in one trial. All methods of a trial share `data`.
struct MethodContext {
  const ProblemInstance& instance;
  const Dataset& data;
  double naive_value;
  const BootstrapPlan& plan;
  const RandomStream& stream;  // bootstrap stream shared by every method of the trial
};

struct TrialMethod {
  std::string name;
  std::function<double(const MethodContext&)> run;
  std::optional<Method> builtin;
};

inline TrialMethod builtin_method(Method m) {
  TrialMethod out{to_string(m), {}, m};
  out.run = [m](const MethodContext& ctx) -> double {
    return std::visit(
        [&](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, PairObjective>) {
            const auto& data = std::get<PairedDiracSet>(ctx.data);
            if (m == Method::shift_bootstrap) return shift_debias(f, data, ctx.plan, ctx.stream).debiased_value;
            if (m == Method::scale_bootstrap) return scale_debias(f, data, ctx.plan, ctx.stream).debiased_value;
            throw Error(ErrorKind::unsupported, "covariance debiasing is not available for paired distributions");
          } else {
            const auto& data = std::get<ObservationSet>(ctx.data);
            switch (m) {
              case Method::shift_bootstrap: return shift_debias(f, data, ctx.plan, ctx.stream).debiased_value;
              case Method::scale_bootstrap: return scale_debias(f, data, ctx.plan, ctx.stream).debiased_value;
              case Method::covariance:
                return covariance_debias(f, data, ctx.instance.covariance_denominator).debiased_value;
            }
            throw Error(ErrorKind::unsupported, "unknown method");
          }
        },
        ctx.instance.objective);
  };
  return out;
}

/// Reports the naive value unchanged.
inline TrialMethod identity_method() {
  return {"identity", [](const MethodContext& ctx) { return ctx.naive_value; }, std::nullopt};
}

/// Reports the ground truth.
inline TrialMethod oracle_method() {
  return {"oracle", [](const MethodContext& ctx) { return ctx.instance.truth_value; }, std::nullopt};
}

inline Method parse_method(const std::string& s) {
  if (s == "shift") return Method::shift_bootstrap;
  if (s == "scale") return Method::scale_bootstrap;
  if (s == "cov" || s == "covariance") return Method::covariance;
  throw Error(ErrorKind::config, "unknown method '" + s + "' (expected shift, scale, cov or all)");
}

/// Built-in methods by name; "all" (or an empty list) selects every method
/// the instance supports. Inapplicable methods are a configuration error.
inline std::vector<TrialMethod> resolve_methods(const ProblemInstance& inst, const std::vector<std::string>& names) {
  std::vector<TrialMethod> out;
  const bool all = names.empty() || (names.size() == 1 && names.front() == "all");
  if (all) {
    for (Method m : inst.methods) out.push_back(builtin_method(m));
    return out;
  }
  for (const auto& n : names) {
    const Method m = parse_method(n);
    if (!inst.supports(m))
      throw Error(ErrorKind::config, "method '" + n + "' is not applicable to " + to_string(inst.id));
    out.push_back(builtin_method(m));
  }
  return out;
}

inline void check_methods(const ProblemInstance& inst, const std::vector<TrialMethod>& methods) {
  for (const auto& m : methods)
    if (m.builtin && !inst.supports(*m.builtin))
      throw Error(ErrorKind::config, "method '" + m.name + "' is not applicable to " + to_string(inst.id));
}

inline std::uint64_t fingerprint(const Dataset& data) {
  return std::visit([](const auto& d) { return d.fingerprint(); }, data);
}

inline double naive_estimate(const ProblemInstance& inst, const Dataset& data) {
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, PairObjective>)
          return detail::checked_eval(f, std::get<PairedDiracSet>(data).mean(), "sample mean");
        else
          return detail::checked_eval(f, std::get<ObservationSet>(data).mean(), "sample mean");
      },
      inst.objective);
}

struct TrialRecord {
  std::size_t trial_index = 0;
  double truth_value = 0.0;
  double naive_value = 0.0;
  std::vector<double> debiased;  // one per method, in method order
  std::vector<std::uint64_t> seed_path;
  std::uint64_t data_fingerprint = 0;
  bool failed = false;
  std::string failure;
};

/// One trial: a fresh observation set from stream.split(0); every method
/// evaluated on it with bootstrap stream stream.split(1).
inline TrialRecord run_trial(const ProblemInstance& inst, std::size_t n, const BootstrapPlan& plan,
                             const std::vector<TrialMethod>& methods, const RandomStream& stream,
                             std::size_t trial_index = 0) {
  check_methods(inst, methods);
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.truth_value = inst.truth_value;
  rec.seed_path = stream.path();
  try {
    const Dataset data = sample_observations(inst, n, stream.split(0));
    rec.data_fingerprint = fingerprint(data);
    rec.naive_value = naive_estimate(inst, data);
    const RandomStream boot = stream.split(1);
    for (const auto& m : methods) {
      const MethodContext ctx{inst, data, rec.naive_value, plan, boot};
      const double v = m.run(ctx);
      if (!std::isfinite(v)) throw Error(ErrorKind::numeric, "method '" + m.name + "' returned a non-finite value");
      rec.debiased.push_back(v);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    rec.failed = true;
    rec.failure = e.what();
    rec.debiased.clear();
  }
  return rec;
}

struct MethodSummary {
  std::string name;
  double sum_sq = 0.0;  // Σ (F_debias - F*)²
  double sum = 0.0;     // Σ (F_debias - F*)
  double rmse_r = 0.0;
  double bias_r = 0.0;
};

struct ExperimentSummary {
  std::string problem;
  ParamMap params;
  std::string axis = "none";
  std::optional<double> axis_value;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  double truth_value = 0.0;
  double naive_sum_sq = 0.0;
  double naive_sum = 0.0;
  std::vector<MethodSummary> methods;
  std::size_t failed_trials = 0;
};

/// RMSE_r = √Σ(F_debias-F*)² / √Σ(F_naive-F*)²; NaN when the naive sum is 0.
inline double relative_rmse(double sum_sq, double naive_sum_sq) {
  if (naive_sum_sq == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(sum_sq) / std::sqrt(naive_sum_sq);
}

/// Bias_r = Σ(F_debias-F*) / Σ(F_naive-F*); NaN when the naive sum is 0.
inline double relative_bias(double sum, double naive_sum) {
  if (naive_sum == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sum / naive_sum;
}

struct RunOptions {
  std::size_t workers = 1;
  bool abort_on_failure = true;
};

/// R trials; trial t uses master.split(t). Records come back in trial
/// order whatever the worker count.
inline std::vector<TrialRecord> run_trials(const ProblemInstance& inst, std::size_t n, const BootstrapPlan& plan,
                                           const std::vector<TrialMethod>& methods, std::size_t trials,
                                           const RandomStream& master, RunOptions opts = {}) {
  require(trials >= 1, ErrorKind::config, "number of trials must be at least 1");
  plan.validate();
  check_methods(inst, methods);
  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        records[t] = run_trial(inst, n, plan, methods, master.split(t), t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = trials;
        return;
      }
    }
  };
  const std::size_t w = std::clamp<std::size_t>(opts.workers, 1, trials);
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < w; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  if (opts.abort_on_failure)
    for (const auto& rec : records)
      if (rec.failed)
        throw Error(ErrorKind::numeric, "trial " + std::to_string(rec.trial_index) + " failed: " + rec.failure);
  return records;
}

/// Reduces records in trial order. Failed trials are counted, never summed.
inline ExperimentSummary summarize(const ProblemInstance& inst, const std::vector<TrialRecord>& records,
                                   const std::vector<TrialMethod>& methods, std::size_t n, const BootstrapPlan& plan,
                                   std::uint64_t seed) {
  ExperimentSummary out;
  out.problem = to_string(inst.id);
  out.params = inst.params;
  out.n = n;
  out.k = plan.resample_rounds;
  out.r = records.size();
  out.seed = seed;
  out.truth_value = inst.truth_value;
  CompensatedSum naive_sq, naive;
  std::vector<CompensatedSum> sq(methods.size()), lin(methods.size());
  for (const auto& rec : records) {
    if (rec.failed) {
      ++out.failed_trials;
      continue;
    }
    const double e = rec.naive_value - rec.truth_value;
    naive_sq += e * e;
    naive += e;
    for (std::size_t j = 0; j < methods.size(); ++j) {
      const double ej = rec.debiased[j] - rec.truth_value;
      sq[j] += ej * ej;
      lin[j] += ej;
    }
  }
  out.naive_sum_sq = naive_sq.value();
  out.naive_sum = naive.value();
  for (std::size_t j = 0; j < methods.size(); ++j) {
    MethodSummary ms{methods[j].name, sq[j].value(), lin[j].value(), 0.0, 0.0};
    ms.rmse_r = relative_rmse(ms.sum_sq, out.naive_sum_sq);
    ms.bias_r = relative_bias(ms.sum, out.naive_sum);
    out.methods.push_back(std::move(ms));
  }
  return out;
}

inline ExperimentSummary run_experiment(const ProblemInstance& inst, std::size_t n, const BootstrapPlan& plan,
                                        const std::vector<TrialMethod>& methods, std::size_t trials,
                                        const RandomStream& master, RunOptions opts = {}) {
  const auto records = run_trials(inst, n, plan, methods, trials, master, opts);
  return summarize(inst, records, methods, n, plan, master.origin_seed());
}

/// Fully-resolved benchmark configuration.
struct ExperimentConfig {
  ProblemId problem = ProblemId::P1;
  ParamMap params;                 // overrides on top of the family preset
  std::optional<std::size_t> n;    // default: preset (P6: n_ratio * d)
  std::optional<std::size_t> k;    // default: preset
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> methods{"all"};
  std::size_t workers = 1;
};

inline ParamMap resolved_params(const ExperimentConfig& cfg) {
  ParamMap p = default_preset(cfg.problem).params;
  for (const auto& [name, value] : cfg.params) apply_param(cfg.problem, p, name, value);
  return p;
}

inline std::size_t resolved_n(const ExperimentConfig& cfg, const ParamMap& params) {
  if (cfg.n) return *cfg.n;
  return implied_n(cfg.problem, params, default_preset(cfg.problem).n);
}

inline std::size_t resolved_k(const ExperimentConfig& cfg) { return cfg.k.value_or(default_preset(cfg.problem).k); }

namespace detail {

inline ExperimentSummary run_configured(const ExperimentConfig& cfg, const ParamMap& params, std::size_t n,
                                        std::size_t k, const RandomStream& lineage) {
  const ProblemInstance inst = generate_instance(cfg.problem, params, lineage.split(0));
  const auto methods = resolve_methods(inst, cfg.methods);
  BootstrapPlan plan{k, 0, cfg.seed};
  return run_experiment(inst, n, plan, methods, cfg.trials, lineage.split(1), {cfg.workers, true});
}

}  // namespace detail

/// One experiment with the instance drawn from seed.split(0) and trials from seed.split(1).
inline ExperimentSummary run_bench(const ExperimentConfig& cfg) {
  const ParamMap params = resolved_params(cfg);
  const RandomStream master(cfg.seed);
  auto s = detail::run_configured(cfg, params, resolved_n(cfg, params), resolved_k(cfg), master);
  s.seed = cfg.seed;
  return s;
}

/// Axes a sweep may vary for a family: its parameters plus n and K.
inline std::vector<std::string> sweep_axes(ProblemId id) {
  auto axes = parameter_names(id);
  axes.emplace_back("n");
  axes.emplace_back("K");
  return axes;
}

/// One summary per axis value; value i uses a fresh instance from the
/// lineage seed.split(i).
inline std::vector<ExperimentSummary> run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                                const std::vector<double>& values) {
  const auto axes = sweep_axes(cfg.problem);
  if (std::find(axes.begin(), axes.end(), axis) == axes.end()) {
    std::string valid;
    for (const auto& a : axes) valid += (valid.empty() ? "" : ", ") + a;
    throw Error(ErrorKind::config, "invalid sweep axis '" + axis + "' for " + to_string(cfg.problem) + " (valid: " + valid + ")");
  }
  require(!values.empty(), ErrorKind::config, "sweep needs at least one value");
  const RandomStream master(cfg.seed);
  std::vector<ExperimentSummary> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    ParamMap params = resolved_params(cfg);
    std::size_t n = resolved_n(cfg, params);
    std::size_t k = resolved_k(cfg);
    if (axis == "n" || axis == "K") {
      require(v >= 1 && std::floor(v) == v, ErrorKind::config, "sweep axis " + axis + " needs positive integers");
      (axis == "n" ? n : k) = static_cast<std::size_t>(v);
    } else {
      apply_param(cfg.problem, params, axis, v);
      if (!cfg.n) n = implied_n(cfg.problem, params, n);
    }
    auto s = detail::run_configured(cfg, params, n, k, master.split(i));
    s.axis = axis;
    s.axis_value = v;
    s.seed = cfg.seed;
    out.push_back(std::move(s));
  }
  return out;
}

/// Paired squared-error comparison of each method against the naive estimate.
struct MseComparison {
  std::string name;
  double mse_naive = 0.0;
  double mse_debiased = 0.0;
  double mean_difference = 0.0;               // mean of (debias err)² - (naive err)²
  std::optional<double> standard_error;       // absent when R = 1
};

inline std::vector<MseComparison> empirical_mse_comparison(const ProblemInstance& inst, std::size_t n,
                                                           const BootstrapPlan& plan,
                                                           const std::vector<TrialMethod>& methods,
                                                           std::size_t trials, const RandomStream& master,
                                                           RunOptions opts = {}) {
  const auto records = run_trials(inst, n, plan, methods, trials, master, opts);
  const double r = static_cast<double>(records.size());
  std::vector<MseComparison> out;
  for (std::size_t j = 0; j < methods.size(); ++j) {
    CompensatedSum naive, deb, diff;
    std::vector<double> diffs;
    diffs.reserve(records.size());
    for (const auto& rec : records) {
      const double en = rec.naive_value - rec.truth_value;
      const double ed = rec.debiased[j] - rec.truth_value;
      naive += en * en;
      deb += ed * ed;
      diffs.push_back(ed * ed - en * en);
      diff += diffs.back();
    }
    MseComparison c{methods[j].name, naive.value() / r, deb.value() / r, diff.value() / r, std::nullopt};
    if (records.size() > 1) {
      CompensatedSum ss;
      for (double x : diffs) ss += (x - c.mean_difference) * (x - c.mean_difference);
      c.standard_error = std::sqrt(ss.value() / (r - 1.0) / r);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace debias
