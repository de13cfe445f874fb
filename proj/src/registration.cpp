#include "lor/registration.hpp"

#include <cmath>

#include "lor/error.hpp"

namespace lor {

RegistrationResult register_images(const Objective& objective, const Transform& init,
                                   const OptimizerOptions& options) {
  Transform work = init;
  const ObjectiveFunction f = [&](std::span<const double> p, std::vector<double>& g) {
    work.set_params(p);
    return objective.value_and_gradient(work, g);
  };
  std::vector<double> x(init.params().begin(), init.params().end());
  RegistrationResult r;
  r.trace = minimize_lbfgs(f, x, options);
  r.transform = init;
  r.transform.set_params(x);
  r.final_value = r.trace.entries.back().value;
  return r;
}

RegistrationResult register_images(const ObjectiveConfig& config, const ImageGrid& moving,
                                   const ImageGrid& fixed, const Transform& init,
                                   const OptimizerOptions& options) {
  const Objective objective(config, moving, fixed);
  return register_images(objective, init, options);
}

namespace {

nlohmann::json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const nlohmann::json& j, double fallback) {
  if (j.is_null()) return fallback;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::InvalidArgument, "expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const ObjectiveConfig& c) {
  const auto& e = c.estimator;
  nlohmann::json sampling{{"mode", e.sampling.mode == SampleMode::All      ? "all"
                                   : e.sampling.mode == SampleMode::Stride ? "stride"
                                                                           : "random"},
                          {"stride", e.sampling.stride},
                          {"count", e.sampling.count},
                          {"seed", e.sampling.seed},
                          {"margin", e.sampling.margin}};
  return {{"measure", to_string(c.measure.kind)},
          {"q", c.measure.q},
          {"k_loss", c.measure.k_loss},
          {"estimator", to_string(e.estimator)},
          {"sigma", e.scales.sigma},
          {"beta", e.scales.beta},
          {"alpha", number(e.scales.alpha)},
          {"bins", e.bins},
          {"parzen", to_string(e.parzen)},
          {"window", to_string(e.window)},
          {"spatial_ssd", c.spatial_ssd},
          {"sampling", sampling}};
}

ObjectiveConfig objective_config_from_json(const nlohmann::json& j) {
  ObjectiveConfig c;
  try {
    c.measure.kind = measure_kind_from_string(j.value("measure", std::string("nmi")));
    c.measure.q = j.value("q", c.measure.q);
    c.measure.k_loss = j.value("k_loss", c.measure.k_loss);
    auto& e = c.estimator;
    e.estimator = estimator_from_string(j.value("estimator", std::string("pw")));
    e.scales.sigma = j.value("sigma", e.scales.sigma);
    e.scales.beta = j.value("beta", e.scales.beta);
    e.scales.alpha = read_number(j.contains("alpha") ? j["alpha"] : nlohmann::json(), e.scales.alpha);
    e.bins = j.value("bins", e.bins);
    e.parzen = kernel_family_from_string(j.value("parzen", to_string(e.parzen)));
    e.window = kernel_family_from_string(j.value("window", to_string(e.window)));
    c.spatial_ssd = j.value("spatial_ssd", false);
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      const std::string mode = s.value("mode", std::string("all"));
      e.sampling.mode = mode == "stride"   ? SampleMode::Stride
                        : mode == "random" ? SampleMode::Random
                                           : SampleMode::All;
      e.sampling.stride = s.value("stride", e.sampling.stride);
      e.sampling.count = s.value("count", e.sampling.count);
      e.sampling.seed = s.value("seed", e.sampling.seed);
      e.sampling.margin = s.value("margin", e.sampling.margin);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorKind::InvalidArgument, std::string("objective config: ") + ex.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const OptimizerOptions& o) {
  return {{"max_iterations", o.max_iterations}, {"memory", o.memory},
          {"grad_tolerance", o.grad_tolerance}, {"step_tolerance", o.step_tolerance},
          {"initial_step", o.initial_step},     {"c1", o.c1},
          {"c2", o.c2},                         {"max_line_search", o.max_line_search}};
}

OptimizerOptions optimizer_options_from_json(const nlohmann::json& j) {
  OptimizerOptions o;
  o.max_iterations = j.value("max_iterations", o.max_iterations);
  o.memory = j.value("memory", o.memory);
  o.grad_tolerance = j.value("grad_tolerance", o.grad_tolerance);
  o.step_tolerance = j.value("step_tolerance", o.step_tolerance);
  o.initial_step = j.value("initial_step", o.initial_step);
  o.c1 = j.value("c1", o.c1);
  o.c2 = j.value("c2", o.c2);
  o.max_line_search = j.value("max_line_search", o.max_line_search);
  return o;
}

nlohmann::json to_json(const RegistrationResult& r, const ObjectiveConfig& config) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace.entries) {
    trace.push_back({{"value", e.value}, {"grad_norm", e.grad_norm}, {"step", e.step}});
  }
  return {{"transform",
           {{"kind", to_string(r.transform.kind())},
            {"ndim", r.transform.ndim()},
            {"params", std::vector<double>(r.transform.params().begin(), r.transform.params().end())}}},
          {"final_value", r.final_value},
          {"config", to_json(config)},
          {"trace",
           {{"iterations", r.trace.entries.size() - 1},
            {"evaluations", r.trace.evaluations},
            {"termination", to_string(r.trace.reason)},
            {"entries", trace}}}};
}

}  // namespace lor
