#pragma once

// Phase-estimation cost model with all asymptotic constants set to one.

#include <cstdint>
#include <optional>
#include <string>

namespace qembed {

enum class QpeMode { kStandard, kAmplified, kSingleAncilla, kHighOverlap };

std::string to_string(QpeMode mode);
/// Accepts "standard", "amplified", "single-ancilla", "high-overlap".
QpeMode parse_qpe_mode(const std::string& name);

struct CostReport {
  QpeMode mode = QpeMode::kStandard;
  double eta = 0.0;
  double eps = 0.0;
  double repetitions = 0.0;
  double max_evolution_time = 0.0;    // units of 1/energy
  double total_evolution_time = 0.0;
  double delta = 0.0;                 // 1 - eta^2
  std::string assumptions;
};

/// Requires 0 < eta <= 1 and eps > 0; high-overlap also needs eta^2 > 1/2.
CostReport qpe_cost(double eta, double eps, QpeMode mode);

enum class GuidingKind { kGivens, kSumOfSlater, kBoundedExcitation, kMps };

std::string to_string(GuidingKind kind);
/// Accepts "givens", "sos", "bounded-excitation", "mps".
GuidingKind parse_guiding_kind(const std::string& name);

struct GateParams {
  std::optional<int> n_modes;     // N
  std::optional<int> electrons;   // n
  std::optional<int> terms;       // L
  std::optional<int> excitations; // k
  std::optional<int> bond_dim;    // D
};

struct GateCounts {
  GuidingKind kind = GuidingKind::kGivens;
  double two_qubit = 0.0;
  std::optional<double> toffoli;
  std::string disclaimer;
};

/// Givens: n(N-n). Sum of Slater: NL two-qubit, L log2 L Toffoli.
/// Bounded excitation: Lk. MPS: N D^2.
GateCounts guiding_gate_counts(GuidingKind kind, const GateParams& p);

}  // namespace qembed
