#include "qembed/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qembed/analysis.hpp"
#include "qembed/embedding.hpp"
#include "qembed/impurity.hpp"
#include "qembed/meanfield.hpp"
#include "qembed/mps.hpp"
#include "qembed/qpecost.hpp"
#include "qembed/solver.hpp"
#include "qembed/states.hpp"

namespace qembed {

using nlohmann::json;

namespace {

const std::set<std::string> kTaskTypes = {"solve",  "mean-field",        "embed",   "guiding",
                                          "oligomer", "impurity-ensemble", "qpe-cost"};

// ---------------------------------------------------------------------------
// JSON reading with strict key and type checks.

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) fail(k, "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  std::string str(const char* key, const std::string& fallback = {}) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) fail(key, "expected a string");
    return j_.at(key).get<std::string>();
  }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number()) fail(key, "expected a number");
    return j_.at(key).get<double>();
  }

  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number_integer()) fail(key, "expected an integer");
    return j_.at(key).get<int>();
  }

  std::optional<std::uint64_t> seed(const char* key) const {
    if (!has(key)) return std::nullopt;
    if (!j_.at(key).is_number_unsigned()) fail(key, "expected a nonnegative integer");
    return j_.at(key).get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) fail(key, "expected a boolean");
    return j_.at(key).get<bool>();
  }

  template <class T>
  std::vector<T> list(const char* key) const {
    if (!has(key)) return {};
    const json& a = j_.at(key);
    if (!a.is_array()) fail(key, "expected an array");
    std::vector<T> out;
    for (const json& e : a) {
      if constexpr (std::is_same_v<T, int>) {
        if (!e.is_number_integer()) fail(key, "expected integers");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!e.is_number()) fail(key, "expected numbers");
      } else {
        if (!e.is_string()) fail(key, "expected strings");
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  const json& raw(const char* key) const { return j_.at(key); }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(where_ + (key.empty() ? "" : "/" + key) + ": " + msg);
  }

 private:
  const json& j_;
  std::string where_;
};

ModelSpec parse_model(const json& j) {
  Reader r(j, "/model");
  ModelSpec m;
  m.builder = r.str("builder");
  if (m.builder == "file") {
    r.allow({"builder", "path"});
    m.path = r.str("path");
  } else if (m.builder == "hubbard") {
    r.allow({"builder", "sites", "t", "u", "periodic"});
    m.sites = r.integer("sites", 0);
    m.t = r.number("t", 1.0);
    m.u = r.number("u", 0.0);
    m.periodic = r.boolean("periodic", false);
  } else if (m.builder == "random") {
    r.allow({"builder", "modes", "scale", "seed"});
    m.modes = r.integer("modes", 0);
    m.scale = r.number("scale", 0.5);
    m.seed = r.seed("seed");
  } else if (m.builder == "impurity") {
    r.allow({"builder", "modes", "impurity_modes", "gap", "scale", "seed"});
    m.modes = r.integer("modes", 0);
    m.impurity_modes = r.integer("impurity_modes", 0);
    m.gap = r.number("gap", 0.0);
    m.scale = r.number("scale", 0.5);
    m.seed = r.seed("seed");
  } else {
    r.fail("builder", "unknown builder '" + m.builder + "'");
  }
  return m;
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["builder"] = m.builder;
  if (m.builder == "file") {
    j["path"] = m.path;
  } else if (m.builder == "hubbard") {
    j["sites"] = m.sites;
    j["t"] = m.t;
    j["u"] = m.u;
    j["periodic"] = m.periodic;
  } else if (m.builder == "random") {
    j["modes"] = m.modes;
    j["scale"] = m.scale;
    if (m.seed) j["seed"] = *m.seed;
  } else if (m.builder == "impurity") {
    j["modes"] = m.modes;
    j["impurity_modes"] = m.impurity_modes;
    j["gap"] = m.gap;
    j["scale"] = m.scale;
    if (m.seed) j["seed"] = *m.seed;
  }
  return j;
}

TaskSpec parse_task(const json& j, std::size_t index) {
  Reader r(j, "/tasks/" + std::to_string(index));
  TaskSpec t;
  t.type = r.str("type");
  if (!kTaskTypes.count(t.type)) r.fail("type", "unknown task type '" + t.type + "'");
  if (t.type == "solve" || t.type == "mean-field") {
    r.allow({"type"});
  } else if (t.type == "embed") {
    r.allow({"type", "scheme", "fragment", "mu"});
    t.scheme = r.str("scheme");
    t.fragment = r.list<int>("fragment");
    t.mu = r.number("mu", 1e3);
  } else if (t.type == "guiding") {
    t.kind = r.str("kind");
    if (t.kind == "hf") {
      r.allow({"type", "kind"});
    } else if (t.kind == "sos") {
      r.allow({"type", "kind", "L"});
      if (r.has("L") && r.raw("L").is_string()) {
        if (r.str("L") != "all") r.fail("L", "expected an array or \"all\"");
        t.all_values = true;
      } else {
        t.values = r.list<int>("L");
      }
    } else if (t.kind == "mps") {
      r.allow({"type", "kind", "D"});
      t.values = r.list<int>("D");
    } else if (t.kind == "theorem1") {
      r.allow({"type", "kind", "K", "policy"});
      t.values = r.list<int>("K");
      t.policy = r.str("policy", "auto");
    } else {
      r.fail("kind", "unknown guiding kind '" + t.kind + "'");
    }
  } else if (t.type == "oligomer") {
    r.allow({"type", "k", "coupling"});
    t.values = r.list<int>("k");
    if (r.has("coupling")) t.coupling = r.number("coupling", 0.0);
  } else if (t.type == "impurity-ensemble") {
    r.allow({"type", "count", "modes", "impurity_modes", "electrons", "gap", "seed", "K"});
    t.count = r.integer("count", 0);
    t.n_modes = r.integer("modes", 0);
    t.impurity_modes = r.integer("impurity_modes", 0);
    t.electrons = r.integer("electrons", t.n_modes / 2);
    t.gap = r.number("gap", 0.0);
    t.seed = r.seed("seed");
    t.values = r.list<int>("K");
  } else if (t.type == "qpe-cost") {
    r.allow({"type", "eta", "eps", "modes"});
    t.eta = r.list<double>("eta");
    t.eps = r.list<double>("eps");
    t.modes = r.list<std::string>("modes");
  }
  return t;
}

json task_to_json(const TaskSpec& t) {
  json j;
  j["type"] = t.type;
  if (t.type == "embed") {
    j["scheme"] = t.scheme;
    j["fragment"] = t.fragment;
    j["mu"] = t.mu;
  } else if (t.type == "guiding") {
    j["kind"] = t.kind;
    if (t.kind == "sos") {
      if (t.all_values)
        j["L"] = "all";
      else
        j["L"] = t.values;
    } else if (t.kind == "mps") {
      j["D"] = t.values;
    } else if (t.kind == "theorem1") {
      j["K"] = t.values;
      j["policy"] = t.policy;
    }
  } else if (t.type == "oligomer") {
    j["k"] = t.values;
    j["coupling"] = t.coupling ? json(*t.coupling) : json(nullptr);
  } else if (t.type == "impurity-ensemble") {
    j["count"] = t.count;
    j["modes"] = t.n_modes;
    j["impurity_modes"] = t.impurity_modes;
    j["electrons"] = t.electrons;
    j["gap"] = t.gap;
    if (t.seed) j["seed"] = *t.seed;
    j["K"] = t.values;
  } else if (t.type == "qpe-cost") {
    j["eta"] = t.eta;
    j["eps"] = t.eps;
    j["modes"] = t.modes;
  }
  return j;
}

json config_json(const ExperimentConfig& c) {
  json j;
  if (c.model) j["model"] = model_to_json(*c.model);
  if (c.electrons) j["electrons"] = *c.electrons;
  j["seed"] = c.seed;
  j["output"] = c.output;
  if (c.max_dim) j["max_dim"] = *c.max_dim;
  j["tasks"] = json::array();
  for (const TaskSpec& t : c.tasks) j["tasks"].push_back(task_to_json(t));
  return j;
}

// ---------------------------------------------------------------------------
// Validation helpers.

bool needs_model(const TaskSpec& t) {
  return t.type != "impurity-ensemble" && t.type != "qpe-cost";
}

bool needs_ground_state(const TaskSpec& t) {
  return t.type == "solve" || t.type == "embed" || t.type == "guiding";
}

FreezePolicy parse_policy(const std::string& s) {
  if (s == "auto") return FreezePolicy::kAuto;
  if (s == "proof") return FreezePolicy::kProof;
  if (s == "balanced") return FreezePolicy::kBalanced;
  throw InvalidArgument("unknown freeze policy '" + s + "'");
}

std::string sector_message(int n_modes, int electrons, std::uint64_t dim, std::uint64_t cap) {
  return "sector dimension binomial(" + std::to_string(n_modes) + "," +
         std::to_string(electrons) + ") = " + std::to_string(dim) + " exceeds cap " +
         std::to_string(cap);
}

// Mode count of the configured model without building it (file models are
// read). Adds diagnostics on failure.
std::optional<std::pair<int, int>> model_shape(const ExperimentConfig& c,
                                               std::vector<Diagnostic>& out) {
  const ModelSpec& m = *c.model;
  int n_modes = 0;
  std::optional<int> electrons = c.electrons;
  if (m.builder == "file") {
    const std::filesystem::path p = c.base_dir / m.path;
    if (m.path.empty() || !std::filesystem::is_regular_file(p)) {
      out.push_back({"/model/path", "integrals file not found: " + p.string()});
      return std::nullopt;
    }
    try {
      const IntegralFile f = read_integrals(p);
      n_modes = f.integrals.n_modes();
      if (!electrons) electrons = f.electrons;
    } catch (const Error& e) {
      out.push_back({"/model/path", p.string() + ": " + e.what()});
      return std::nullopt;
    }
  } else if (m.builder == "hubbard") {
    if (m.sites < 1 || 2 * m.sites > kMaxModes) {
      out.push_back({"/model/sites", "sites must be in [1, " + std::to_string(kMaxModes / 2) + "]"});
      return std::nullopt;
    }
    n_modes = 2 * m.sites;
  } else {
    if (m.modes < 1 || m.modes > kMaxModes) {
      out.push_back({"/model/modes", "modes must be in [1, " + std::to_string(kMaxModes) + "]"});
      return std::nullopt;
    }
    n_modes = m.modes;
    if (m.builder == "impurity") {
      if (m.impurity_modes < 0 || m.impurity_modes > m.modes)
        out.push_back({"/model/impurity_modes", "impurity_modes must be in [0, modes]"});
      if (!(m.gap >= 0.0 && m.gap < 1.0))
        out.push_back({"/model/gap", "gap must be in [0, 1)"});
    }
  }
  if (!electrons) {
    out.push_back({"/electrons", "electron count is required for this model"});
    return std::nullopt;
  }
  if (*electrons < 0 || *electrons > n_modes) {
    out.push_back({"/electrons", "electron count " + std::to_string(*electrons) +
                                     " outside [0, " + std::to_string(n_modes) + "]"});
    return std::nullopt;
  }
  return std::make_pair(n_modes, *electrons);
}

// ---------------------------------------------------------------------------
// CSV output.

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join_modes(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

class Csv {
 public:
  explicit Csv(std::string header) { text_ = std::move(header) + "\n"; }
  template <class... T>
  void row(const T&... fields) {
    std::string line;
    ((line += cell(fields) + ","), ...);
    line.back() = '\n';
    text_ += line;
    ++rows_;
  }
  int rows() const { return rows_; }
  void write(const std::filesystem::path& p) const {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text_;
  }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }
  std::string text_;
  int rows_ = 0;
};

// ---------------------------------------------------------------------------
// Execution.

struct Context {
  const ExperimentConfig& config;
  std::optional<ResolvedModel> model;
  std::optional<GroundStateResult> ground;
  std::optional<MeanFieldResult> mf;

  const ResolvedModel& m() const { return *model; }
  const GroundStateResult& gs() {
    if (!ground) ground = ground_state(model->integrals, model->electrons);
    return *ground;
  }
  const MeanFieldResult& hf() {
    if (!mf) mf = hartree_fock(model->integrals, model->electrons);
    return *mf;
  }
  std::string seed() const { return std::to_string(config.seed); }
};

void run_solve(Context& ctx, Csv& csv) {
  const GroundStateResult& g = ctx.gs();
  const int n = ctx.m().electrons;
  const MolecularIntegrals& h = ctx.m().integrals;
  std::string dense;
  if (binomial(h.n_modes(), n) <= 4096) dense = num(dense_spectrum(h, n).front());
  csv.row(ctx.seed(), ctx.m().hash, h.n_modes(), n, g.state.size(), g.energy, dense,
          g.residual, g.iterations, g.degenerate, g.gap);
}

void run_mean_field(Context& ctx, Csv& csv) {
  const MeanFieldResult& mf = ctx.hf();
  const int n = mf.electrons();
  const auto& e = mf.orbital_energies;
  const double homo = n > 0 ? e[static_cast<std::size_t>(n - 1)] : std::nan("");
  const double lumo = n < static_cast<int>(e.size()) ? e[static_cast<std::size_t>(n)] : std::nan("");
  csv.row(ctx.seed(), ctx.m().hash, mf.energy, mf.converged, mf.iterations, homo, lumo);
}

void run_embed(Context& ctx, const TaskSpec& t, Csv& csv) {
  const MolecularIntegrals& h = ctx.m().integrals;
  const MeanFieldResult& mf = ctx.hf();
  EmbeddingProblem prob;
  if (t.scheme == "dmet")
    prob = dmet_effective(h, schmidt_bath(mf.determinant, t.fragment));
  else
    prob = huzinaga_effective(h, mf, t.fragment, t.mu);
  const EmbeddingResult r = embed_solve(prob);
  const GroundStateResult& g = ctx.gs();
  csv.row(ctx.seed(), ctx.m().hash, t.scheme, join_modes(t.fragment),
          t.scheme == "huzinaga" ? num(t.mu) : std::string{}, prob.active_count,
          prob.n_active, prob.bath_count, r.total_energy, g.energy, r.total_energy - g.energy,
          std::abs(overlap(r.guiding, g.state)), r.leakage);
}

void run_guiding(Context& ctx, const TaskSpec& t, Csv& csv) {
  const MolecularIntegrals& h = ctx.m().integrals;
  const GroundStateResult& g = ctx.gs();
  const WaveFunction& psi = g.state;
  const std::string s = ctx.seed();
  const std::string& hash = ctx.m().hash;
  if (t.kind == "hf") {
    const WaveFunction hf = determinant_to_wavefunction(ctx.hf().determinant);
    const double e = expectation(h, hf);
    csv.row(s, hash, std::abs(overlap(hf, psi)), e, e - g.energy);
  } else if (t.kind == "sos") {
    std::vector<int> ls = t.values;
    if (t.all_values)
      for (std::size_t l = 1; l <= psi.size(); ++l) ls.push_back(static_cast<int>(l));
    for (int l : ls) {
      const SumOfSlater sos = sum_of_slater(psi, static_cast<std::size_t>(l));
      const WaveFunction w = sos.to_wavefunction();
      const double e = expectation(h, w);
      csv.row(s, hash, l, std::abs(overlap(w, psi)), e, e - g.energy, sos.retained_weight);
    }
  } else if (t.kind == "mps") {
    for (int d : t.values) {
      const MPSState m = mps_compress(psi, d);
      const WaveFunction w = mps_to_wavefunction(m);
      const double e = expectation(h, w);
      double discarded = 0.0;
      for (double x : m.discarded_weight) discarded += x;
      csv.row(s, hash, d, m.max_bond(), std::abs(mps_overlap(m, psi)), e, e - g.energy,
              discarded);
    }
  } else {
    const ImpurityModel& imp = *ctx.m().impurity;
    const int n = ctx.m().electrons;
    const OneBodyRDM gamma = one_rdm(psi);
    const ParticleHoleFrame frame = particle_hole(imp, n);
    for (int k : t.values) {
      const ActiveSelection sel = select_active(gamma, imp, n, k, parse_policy(t.policy));
      const Theorem1State st = theorem1_state(psi, sel);
      const int exc = max_excitations(st.projected, frame);
      const MixedOverlap mix = mixed_guiding_overlap(psi, exc, frame);
      const double e = expectation(h, st.projected);
      csv.row(s, hash, k, t.policy, sel.active_count, sel.i_minus.size(), sel.i_plus.size(),
              st.overlap, sel.delta_bound, 1.0 - sel.delta_bound, exc, mix.dim_v,
              mix.overlap_with_tau, st.overlap * st.overlap / static_cast<double>(mix.dim_v), e,
              e - g.energy);
    }
  }
}

void run_oligomer(Context& ctx, const TaskSpec& t, Csv& csv) {
  const MolecularIntegrals& mono = ctx.m().integrals;
  const int n = ctx.m().electrons;
  std::optional<OligomerCoupling> coupling;
  if (t.coupling) coupling = OligomerCoupling{std::nullopt, *t.coupling};
  double mono_overlap = 0.0;
  for (int k : t.values) {
    const MolecularIntegrals olig = build_oligomer(mono, k, coupling);
    const GroundStateResult g = ground_state(olig, k * n);
    const MeanFieldResult mf = hartree_fock(olig, k * n);
    const double ov = std::abs(overlap(determinant_to_wavefunction(mf.determinant), g.state));
    if (k == 1 || mono_overlap == 0.0) {
      const GroundStateResult g1 = k == 1 ? g : ground_state(mono, n);
      const MeanFieldResult mf1 = k == 1 ? mf : hartree_fock(mono, n);
      mono_overlap = std::abs(overlap(determinant_to_wavefunction(mf1.determinant), g1.state));
    }
    const double product = std::pow(mono_overlap, k);
    csv.row(ctx.seed(), model_hash(olig), k, olig.n_modes(), k * n, ov, product,
            ov - product, g.energy, mf.energy, mf.converged);
  }
}

struct EnsembleRow {
  std::uint64_t seed = 0;
  std::string hash;
  double omega = 0.0;
  double energy = 0.0;
  DecayReport decay;
  struct PerK {
    int k = 0;
    int active = 0;
    double achieved = 0.0;
    double delta = 0.0;
    int excitations = 0;
    std::uint64_t dim_v = 0;
    double mixed = 0.0;
    double t3_bound = 0.0;
  };
  std::vector<PerK> per_k;
};

void run_ensemble(Context& ctx, const TaskSpec& t, Csv& csv) {
  const std::uint64_t base = t.seed.value_or(ctx.config.seed);
  std::vector<EnsembleRow> rows(static_cast<std::size_t>(t.count));
  std::mutex err_mutex;
  std::string first_error;
  std::size_t first_index = rows.size();
  parallel_for(rows.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        EnsembleRow& row = rows[i];
        row.seed = derive_seed(base, i);
        EpsilonSpec eps;
        eps.band = t.gap;
        const ImpurityModel m =
            build_impurity_model(t.n_modes, t.impurity_modes, eps, ImpuritySpec{}, row.seed);
        row.hash = model_hash(m.integrals);
        row.omega = m.omega;
        const GroundStateResult g = ground_state(m.integrals, t.electrons);
        row.energy = g.energy;
        const OneBodyRDM gamma = one_rdm(g.state);
        const ParticleHoleFrame frame = particle_hole(m, t.electrons);
        const OneBodyRDM gamma_b =
            particle_hole_rdm(one_rdm(to_eigenmodes(g.state, frame)), frame.n_negative);
        row.decay = decay_report(gamma_b, m.impurity_modes, m.omega);
        for (int k : t.values) {
          const ActiveSelection sel = select_active(gamma, m, t.electrons, k);
          const Theorem1State st = theorem1_state(g.state, sel);
          EnsembleRow::PerK pk;
          pk.k = k;
          pk.active = sel.active_count;
          pk.achieved = st.overlap;
          pk.delta = sel.delta_bound;
          pk.excitations = max_excitations(st.projected, frame);
          const MixedOverlap mix = mixed_guiding_overlap(g.state, pk.excitations, frame);
          pk.dim_v = mix.dim_v;
          pk.mixed = mix.overlap_with_tau;
          pk.t3_bound = st.overlap * st.overlap / static_cast<double>(mix.dim_v);
          row.per_k.push_back(pk);
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (i < first_index) {
          first_index = i;
          first_error = "ensemble member " + std::to_string(i) + ": " + e.what();
        }
      }
    }
  });
  if (!first_error.empty()) throw Error(first_error);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const EnsembleRow& r = rows[i];
    for (const auto& pk : r.per_k)
      csv.row(std::to_string(r.seed), r.hash, i, r.omega, r.energy, pk.k, pk.active,
              pk.achieved, pk.delta, pk.achieved >= 1.0 - pk.delta - 1e-12, pk.excitations,
              pk.dim_v, pk.mixed, pk.t3_bound, r.decay.slope, r.decay.r_squared,
              r.decay.regression_points);
  }
}

void run_cost(Context& ctx, const TaskSpec& t, Csv& csv) {
  const std::string hash = ctx.model ? ctx.m().hash : "none";
  for (const std::string& name : t.modes) {
    const QpeMode mode = parse_qpe_mode(name);
    for (double eta : t.eta)
      for (double eps : t.eps) {
        if (mode == QpeMode::kHighOverlap && !(eta * eta > 0.5)) {
          csv.row(ctx.seed(), hash, name, eta, eps, false, "", "", "", num(1.0 - eta * eta));
          continue;
        }
        const CostReport r = qpe_cost(eta, eps, mode);
        csv.row(ctx.seed(), hash, name, eta, eps, true, r.repetitions, r.max_evolution_time,
                r.total_evolution_time, r.delta);
      }
  }
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  f << j.dump(2) << "\n";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Reader r(j, "");
  r.allow({"$schema", "model", "electrons", "seed", "output", "max_dim", "tasks"});
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (r.has("model")) c.model = parse_model(j.at("model"));
  if (r.has("electrons")) c.electrons = r.integer("electrons", 0);
  c.seed = r.seed("seed").value_or(0);
  c.output = r.str("output", "out");
  c.max_dim = r.seed("max_dim");
  if (r.has("tasks")) {
    if (!j.at("tasks").is_array()) r.fail("tasks", "expected an array");
    for (std::size_t i = 0; i < j.at("tasks").size(); ++i)
      c.tasks.push_back(parse_task(j.at("tasks").at(i), i));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& c) { return config_json(c).dump(2); }

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> out;
  const std::uint64_t cap = c.max_dim.value_or(max_sector_dim());
  if (c.tasks.empty()) out.push_back({"/tasks", "no tasks"});

  bool want_model = false;
  for (const TaskSpec& t : c.tasks) want_model = want_model || needs_model(t);
  std::optional<std::pair<int, int>> shape;
  if (c.model)
    shape = model_shape(c, out);
  else if (want_model)
    out.push_back({"/model", "a model is required by the listed tasks"});

  const int n_modes = shape ? shape->first : 0;
  const int electrons = shape ? shape->second : 0;
  bool sector_checked = false;

  for (std::size_t i = 0; i < c.tasks.size(); ++i) {
    const TaskSpec& t = c.tasks[i];
    const std::string at = "/tasks/" + std::to_string(i);
    auto diag = [&](const std::string& key, const std::string& msg) {
      out.push_back({at + (key.empty() ? "" : "/" + key), msg});
    };
    if (needs_model(t) && !shape) continue;
    if ((needs_ground_state(t) || t.type == "mean-field") && !sector_checked) {
      sector_checked = true;
      const std::uint64_t dim = binomial(n_modes, electrons);
      if (needs_ground_state(t) && dim > cap)
        diag("", sector_message(n_modes, electrons, dim, cap));
    }
    if (t.type == "embed") {
      if (t.scheme != "dmet" && t.scheme != "huzinaga")
        diag("scheme", "scheme must be dmet or huzinaga");
      if (t.fragment.empty()) diag("fragment", "fragment must be nonempty");
      std::set<int> seen;
      for (int p : t.fragment) {
        if (p < 0 || p >= n_modes)
          diag("fragment", "index " + std::to_string(p) + " outside [0, " +
                               std::to_string(n_modes) + ")");
        if (!seen.insert(p).second) diag("fragment", "duplicate index " + std::to_string(p));
      }
      if (t.scheme == "huzinaga" && !(t.mu > 0.0)) diag("mu", "level shift must be positive");
    } else if (t.type == "guiding") {
      if (t.kind == "sos" && !t.all_values && t.values.empty()) diag("L", "empty L list");
      if (t.kind == "mps" && t.values.empty()) diag("D", "empty D list");
      if (t.kind == "theorem1" && t.values.empty()) diag("K", "empty K list");
      for (int v : t.values)
        if (v < 1) diag(t.kind == "mps" ? "D" : t.kind == "sos" ? "L" : "K",
                        "values must be positive");
      if (t.kind == "mps" && n_modes > 26)
        diag("", "mps compression needs N <= 26 (full 2^N tensor), got " +
                     std::to_string(n_modes));
      if (t.kind == "theorem1") {
        if (c.model->builder != "impurity") {
          diag("kind", "theorem1 needs an impurity model");
        } else {
          const int m = c.model->impurity_modes;
          for (int k : t.values)
            if (k < 2 * m || k > n_modes)
              diag("K", "K = " + std::to_string(k) + " outside [2M, N] = [" +
                            std::to_string(2 * m) + ", " + std::to_string(n_modes) + "]");
        }
        try {
          parse_policy(t.policy);
        } catch (const Error& e) {
          diag("policy", e.what());
        }
      }
    } else if (t.type == "oligomer") {
      if (t.values.empty()) diag("k", "empty k list");
      for (int k : t.values) {
        if (k < 1) {
          diag("k", "copies must be positive");
          continue;
        }
        if (k * n_modes > kMaxModes) {
          diag("k", std::to_string(k) + " copies exceed " + std::to_string(kMaxModes) + " modes");
          continue;
        }
        const std::uint64_t dim = binomial(k * n_modes, k * electrons);
        if (dim > cap) diag("k", sector_message(k * n_modes, k * electrons, dim, cap));
      }
    } else if (t.type == "impurity-ensemble") {
      if (t.count < 1) diag("count", "count must be positive");
      if (t.n_modes < 1 || t.n_modes > kMaxModes) diag("modes", "modes out of range");
      if (t.impurity_modes < 0 || t.impurity_modes > t.n_modes)
        diag("impurity_modes", "impurity_modes must be in [0, modes]");
      if (t.electrons < 0 || t.electrons > t.n_modes) diag("electrons", "electrons out of range");
      if (!(t.gap >= 0.0 && t.gap < 1.0)) diag("gap", "gap must be in [0, 1)");
      if (t.values.empty()) diag("K", "empty K list");
      for (int k : t.values)
        if (k < 2 * t.impurity_modes || k > t.n_modes)
          diag("K", "K = " + std::to_string(k) + " outside [2M, N]");
      if (t.n_modes >= 1 && t.n_modes <= kMaxModes) {
        const std::uint64_t dim = binomial(t.n_modes, t.electrons);
        if (dim > cap) diag("", sector_message(t.n_modes, t.electrons, dim, cap));
      }
    } else if (t.type == "qpe-cost") {
      if (t.eta.empty() || t.eps.empty() || t.modes.empty())
        diag("", "eta, eps and modes must be nonempty");
      for (double e : t.eta)
        if (!(e > 0.0 && e <= 1.0)) diag("eta", "eta must lie in (0, 1]");
      for (double e : t.eps)
        if (!(e > 0.0)) diag("eps", "eps must be positive");
      for (const std::string& m : t.modes) try {
          parse_qpe_mode(m);
        } catch (const Error& e) {
          diag("modes", e.what());
        }
    }
  }
  return out;
}

ResolvedModel resolve_model(const ExperimentConfig& c) {
  if (!c.model) throw InvalidArgument("config has no model");
  const ModelSpec& m = *c.model;
  ResolvedModel r;
  const std::uint64_t seed = m.seed.value_or(c.seed);
  if (m.builder == "file") {
    IntegralFile f = read_integrals(c.base_dir / m.path);
    r.integrals = std::move(f.integrals);
    r.electrons = c.electrons.value_or(f.electrons);
  } else {
    if (m.builder == "hubbard") {
      r.integrals = spin_double(hubbard_chain(m.sites, m.t, m.u, m.periodic));
    } else if (m.builder == "random") {
      r.integrals = random_integrals(m.modes, seed, m.scale);
    } else if (m.builder == "impurity") {
      EpsilonSpec eps;
      eps.band = m.gap;
      ImpuritySpec imp;
      imp.strength = m.scale;
      r.impurity = build_impurity_model(m.modes, m.impurity_modes, eps, imp, seed);
      r.integrals = r.impurity->integrals;
    } else {
      throw InvalidArgument("unknown builder '" + m.builder + "'");
    }
    if (!c.electrons) throw InvalidArgument("electron count is required");
    r.electrons = *c.electrons;
  }
  r.hash = model_hash(r.integrals);
  return r;
}

std::string csv_header(const TaskSpec& t) {
  const std::string prov = "seed,model_hash,";
  if (t.type == "solve")
    return prov + "modes,electrons,dimension,energy,dense_energy,residual,iterations,degenerate,gap";
  if (t.type == "mean-field") return prov + "energy,converged,iterations,homo,lumo";
  if (t.type == "embed")
    return prov + "scheme,fragment,mu,active_modes,active_electrons,bath_modes,total_energy,"
                  "fci_energy,error,guiding_overlap,leakage";
  if (t.type == "guiding") {
    if (t.kind == "hf") return prov + "overlap,energy,energy_minus_reference";
    if (t.kind == "sos") return prov + "L,overlap,energy,energy_minus_reference,retained_weight";
    if (t.kind == "mps")
      return prov + "D,max_bond,overlap,energy,energy_minus_reference,discarded_weight";
    return prov + "K,policy,active_modes,frozen_filled,frozen_empty,achieved_overlap,"
                  "delta_bound,lemma_bound,excitations,dim_v,mixed_overlap,theorem3_bound,"
                  "energy,energy_minus_reference";
  }
  if (t.type == "oligomer")
    return prov + "k,modes,electrons,overlap,monomer_power,deviation,fci_energy,hf_energy,"
                  "hf_converged";
  if (t.type == "impurity-ensemble")
    return prov + "member,omega,energy,K,active_modes,achieved_overlap,delta_bound,certified,"
                  "excitations,dim_v,mixed_overlap,theorem3_bound,decay_slope,decay_r_squared,"
                  "decay_points";
  return prov + "mode,eta,eps,valid,repetitions,max_evolution_time,total_evolution_time,delta";
}

RunResult run(const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.diagnostics = validate(c);
  if (!result.diagnostics.empty()) {
    result.exit_code = 2;
    return result;
  }
  const std::uint64_t saved_cap = max_sector_dim();
  if (c.max_dim) set_max_sector_dim(*c.max_dim);
  struct CapGuard {
    std::uint64_t cap;
    ~CapGuard() { set_max_sector_dim(cap); }
  } guard{saved_cap};

  const std::filesystem::path out_dir = c.output;
  std::filesystem::create_directories(out_dir);
  const std::string started = timestamp();
  Context ctx{c, std::nullopt, std::nullopt, std::nullopt};
  json tasks = json::array();
  json error;
  try {
    bool want_model = false;
    for (const TaskSpec& t : c.tasks) want_model = want_model || needs_model(t);
    if (c.model && want_model) ctx.model = resolve_model(c);
    for (std::size_t i = 0; i < c.tasks.size(); ++i) {
      const TaskSpec& t = c.tasks[i];
      try {
        Csv csv(csv_header(t));
        if (t.type == "solve") run_solve(ctx, csv);
        else if (t.type == "mean-field") run_mean_field(ctx, csv);
        else if (t.type == "embed") run_embed(ctx, t, csv);
        else if (t.type == "guiding") run_guiding(ctx, t, csv);
        else if (t.type == "oligomer") run_oligomer(ctx, t, csv);
        else if (t.type == "impurity-ensemble") run_ensemble(ctx, t, csv);
        else run_cost(ctx, t, csv);
        char name[64];
        std::snprintf(name, sizeof name, "%02zu_%s%s%s.csv", i, t.type.c_str(),
                      t.kind.empty() ? "" : "_", t.kind.c_str());
        csv.write(out_dir / name);
        result.outputs.push_back({t.type, out_dir / name, csv.rows()});
        tasks.push_back({{"index", i}, {"type", t.type}, {"csv", name}, {"rows", csv.rows()}});
      } catch (const std::exception& e) {
        error = {{"task", i}, {"type", t.type}, {"message", e.what()}};
        throw;
      }
    }
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.error = e.what();
    if (error.is_null()) error = {{"task", nullptr}, {"type", "model"}, {"message", e.what()}};
    write_json(out_dir / "error.json", error);
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["program"] = "qembed";
  manifest["version"] = kVersion;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["seed"] = c.seed;
  manifest["max_dim"] = max_sector_dim();
  manifest["threads"] = thread_count();
  manifest["model_hash"] = ctx.model ? json(ctx.m().hash) : json(nullptr);
  manifest["config"] = config_json(c);
  manifest["tasks"] = tasks;
  manifest["status"] = result.exit_code == 0 ? "ok" : "failed";
  if (!error.is_null()) manifest["error"] = error;
  manifest["started"] = started;
  manifest["wall_seconds"] = result.wall_seconds;
  write_json(out_dir / "manifest.json", manifest);
  return result;
}

}  // namespace qembed
