#include "qkf/kernel.hpp"

#include "qkf/errors.hpp"

#include <cmath>

namespace qkf {

KernelSpec KernelSpec::rbf(double gamma) {
  KernelSpec spec;
  spec.params = ClassicalKernelSpec{ClassicalKind::Rbf, gamma, 0.0, 3};
  spec.scaler = Scaler::classical();
  return spec;
}

KernelSpec KernelSpec::quantum(EmbeddingSpec embedding) {
  KernelSpec spec;
  spec.params = std::move(embedding);
  spec.scaler = Scaler::quantum();
  return spec;
}

std::string KernelSpec::kind_name() const {
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&params)) return std::string(to_string(c->kind));
  return std::string(to_string(std::get<EmbeddingSpec>(params).kind));
}

std::string KernelSpec::default_name() const {
  if (const auto* e = std::get_if<EmbeddingSpec>(&params)) return kind_name() + "_" + e->tag();
  return kind_name();
}

void KernelSpec::validate() const {
  std::visit([](const auto& p) { p.validate(); }, params);
}

Matrix kernel_gram(const KernelSpec& spec, const FeatureMatrix& X, unsigned workers) {
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&spec.params))
    return gram_matrix(*c, X, workers);
  return quantum_gram(std::get<EmbeddingSpec>(spec.params), X, workers);
}

Matrix kernel_cross(const KernelSpec& spec, const FeatureMatrix& X, const FeatureMatrix& X2,
                    unsigned workers) {
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&spec.params))
    return gram_matrix(*c, X, X2, workers);
  return quantum_gram(std::get<EmbeddingSpec>(spec.params), X, X2, workers);
}

bool is_trainable(const KernelSpec& spec) {
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&spec.params))
    return c->kind == ClassicalKind::Rbf;
  return std::get<EmbeddingSpec>(spec.params).kind == EmbeddingKind::He2;
}

std::vector<double> trainable_params(const KernelSpec& spec) {
  if (!is_trainable(spec))
    throw Error(ErrorCode::NotTrainable, spec.kind_name() + " kernel has no trainable parameters");
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&spec.params)) return {std::log(c->gamma)};
  return std::get<EmbeddingSpec>(spec.params).theta;
}

KernelSpec with_params(const KernelSpec& spec, const std::vector<double>& params) {
  const auto current = trainable_params(spec);
  if (params.size() != current.size())
    throw Error(ErrorCode::Spec, "parameter vector has wrong length");
  KernelSpec out = spec;
  if (auto* c = std::get_if<ClassicalKernelSpec>(&out.params))
    c->gamma = std::exp(params[0]);
  else
    std::get<EmbeddingSpec>(out.params).theta = params;
  return out;
}

nlohmann::json to_json(const Scaler& s) {
  return {{"source", {s.source_lo, s.source_hi}}, {"target", {s.target_lo, s.target_hi}}};
}

Scaler scaler_from_json(const nlohmann::json& j) {
  Scaler s = Scaler::to_interval(j.at("target").at(0).get<double>(),
                                 j.at("target").at(1).get<double>());
  if (j.contains("source")) {
    s.source_lo = j["source"].at(0).get<double>();
    s.source_hi = j["source"].at(1).get<double>();
    if (!(s.source_hi > s.source_lo))
      throw Error(ErrorCode::Config, "scaler source interval is degenerate");
  }
  return s;
}

nlohmann::json to_json(const KernelSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind_name();
  if (const auto* c = std::get_if<ClassicalKernelSpec>(&spec.params)) {
    j["gamma"] = c->gamma;
    if (c->kind != ClassicalKind::Rbf) j["c0"] = c->c0;
    if (c->kind == ClassicalKind::Polynomial) j["degree"] = c->degree;
  } else {
    const auto& e = std::get<EmbeddingSpec>(spec.params);
    j["width"] = e.width;
    j["depth"] = e.depth;
    if (e.kind == EmbeddingKind::He2) j["theta"] = e.theta;
  }
  j["scaler"] = to_json(spec.scaler);
  return j;
}

KernelSpec kernel_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    KernelSpec spec;
    if (kind == "iqp" || kind == "he2") {
      EmbeddingSpec e;
      e.kind = parse_embedding_kind(kind);
      e.width = j.at("width").get<int>();
      e.depth = j.at("depth").get<int>();
      if (e.kind == EmbeddingKind::He2) e.theta = j.at("theta").get<std::vector<double>>();
      spec = KernelSpec::quantum(std::move(e));
    } else {
      ClassicalKernelSpec c;
      c.kind = parse_classical_kind(kind);
      c.gamma = j.value("gamma", 1.0);
      c.c0 = j.value("c0", 0.0);
      c.degree = j.value("degree", 3);
      spec.params = c;
      spec.scaler = Scaler::classical();
    }
    if (j.contains("scaler")) spec.scaler = scaler_from_json(j["scaler"]);
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Spec, std::string("malformed kernel spec: ") + e.what());
  }
}

}  // namespace qkf
