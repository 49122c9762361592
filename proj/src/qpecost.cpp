#include "qembed/qpecost.hpp"

#include <cmath>

#include "qembed/common.hpp"

namespace qembed {

namespace {

constexpr const char* kCostNote =
    "asymptotic scalings with every constant set to 1; logarithmic factors dropped";
constexpr const char* kGateNote =
    "asymptotic gate counts with unit constants; logarithms base 2";

int require(const std::optional<int>& v, const char* name, GuidingKind kind) {
  if (!v) throw InvalidArgument(to_string(kind) + " gate count needs " + name);
  if (*v < 0) throw InvalidArgument(std::string(name) + " must be nonnegative");
  return *v;
}

}  // namespace

std::string to_string(QpeMode mode) {
  switch (mode) {
    case QpeMode::kStandard: return "standard";
    case QpeMode::kAmplified: return "amplified";
    case QpeMode::kSingleAncilla: return "single-ancilla";
    case QpeMode::kHighOverlap: return "high-overlap";
  }
  return "unknown";
}

QpeMode parse_qpe_mode(const std::string& name) {
  for (QpeMode m : {QpeMode::kStandard, QpeMode::kAmplified,
                    QpeMode::kSingleAncilla, QpeMode::kHighOverlap})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown phase-estimation mode '" + name + "'");
}

CostReport qpe_cost(double eta, double eps, QpeMode mode) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("eps must be positive");
  CostReport r;
  r.mode = mode;
  r.eta = eta;
  r.eps = eps;
  r.delta = 1.0 - eta * eta;
  r.assumptions = kCostNote;
  const double inv_eps = 1.0 / eps;
  switch (mode) {
    case QpeMode::kStandard:
      r.repetitions = 1.0 / (eta * eta);
      r.max_evolution_time = inv_eps;
      r.total_evolution_time = inv_eps / (eta * eta);
      break;
    case QpeMode::kAmplified:
      r.repetitions = 1.0 / eta;
      r.max_evolution_time = inv_eps / eta;
      r.total_evolution_time = inv_eps / eta;
      break;
    case QpeMode::kSingleAncilla: {
      const double e4 = eta * eta * eta * eta;
      r.repetitions = 1.0 / e4;
      r.max_evolution_time = inv_eps;
      r.total_evolution_time = inv_eps / e4;
      break;
    }
    case QpeMode::kHighOverlap:
      if (!(eta * eta > 0.5))
        throw InvalidArgument("high-overlap mode needs eta^2 > 1/2");
      r.repetitions = inv_eps;
      r.max_evolution_time = r.delta * inv_eps;
      r.total_evolution_time = r.delta * inv_eps * inv_eps;
      break;
  }
  return r;
}

std::string to_string(GuidingKind kind) {
  switch (kind) {
    case GuidingKind::kGivens: return "givens";
    case GuidingKind::kSumOfSlater: return "sos";
    case GuidingKind::kBoundedExcitation: return "bounded-excitation";
    case GuidingKind::kMps: return "mps";
  }
  return "unknown";
}

GuidingKind parse_guiding_kind(const std::string& name) {
  for (GuidingKind k : {GuidingKind::kGivens, GuidingKind::kSumOfSlater,
                        GuidingKind::kBoundedExcitation, GuidingKind::kMps})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown guiding-state kind '" + name + "'");
}

GateCounts guiding_gate_counts(GuidingKind kind, const GateParams& p) {
  GateCounts c;
  c.kind = kind;
  c.disclaimer = kGateNote;
  switch (kind) {
    case GuidingKind::kGivens: {
      const int big_n = require(p.n_modes, "N", kind);
      const int n = require(p.electrons, "n", kind);
      if (n > big_n) throw InvalidArgument("n exceeds N");
      c.two_qubit = static_cast<double>(n) * (big_n - n);
      break;
    }
    case GuidingKind::kSumOfSlater: {
      const int big_n = require(p.n_modes, "N", kind);
      const int l = require(p.terms, "L", kind);
      c.two_qubit = static_cast<double>(big_n) * l;
      c.toffoli = l > 0 ? l * std::log2(static_cast<double>(l)) : 0.0;
      break;
    }
    case GuidingKind::kBoundedExcitation: {
      const int l = require(p.terms, "L", kind);
      const int k = require(p.excitations, "k", kind);
      c.two_qubit = static_cast<double>(l) * k;
      break;
    }
    case GuidingKind::kMps: {
      const int big_n = require(p.n_modes, "N", kind);
      const int d = require(p.bond_dim, "D", kind);
      c.two_qubit = static_cast<double>(big_n) * d * d;
      break;
    }
  }
  return c;
}

}  // namespace qembed
