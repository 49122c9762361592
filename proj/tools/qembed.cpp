// qembed command-line front end.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>

#include "qembed/embedding.hpp"
#include "qembed/harness.hpp"
#include "qembed/meanfield.hpp"
#include "qembed/model.hpp"
#include "qembed/qpecost.hpp"
#include "qembed/solver.hpp"

using nlohmann::json;
using namespace qembed;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const Diagnostic& d : diags) out.push_back({{"where", d.where}, {"message", d.message}});
  std::cout << out.dump(2) << "\n";
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_dim;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c, bool with_config) {
  if (with_config) app->add_option("--config", c.config, "experiment config (JSON)")->required();
  app->add_option("--seed", c.seed, "global seed override");
  app->add_option("--max-dim", c.max_dim, "sector dimension cap");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig load_with_overrides(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (c.max_dim) cfg.max_dim = *c.max_dim;
  return cfg;
}

std::vector<int> parse_modes(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

json ground_json(const GroundStateResult& g) {
  return {{"energy", g.energy},           {"residual", g.residual},
          {"iterations", g.iterations},   {"dimension", g.state.size()},
          {"degenerate", g.degenerate},   {"gap", g.gap}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guiding-state and embedding toolkit for fermionic Hamiltonians"};
  app.require_subcommand(1);
  Common common;

  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  add_common(run_cmd, common, true);
  run_cmd->add_option("--out", common.out, "output directory override");

  auto* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  add_common(validate_cmd, common, true);

  std::string model_path;
  std::optional<int> electrons;
  auto* solve_cmd = app.add_subcommand("solve", "ground state of an integrals file");
  add_common(solve_cmd, common, false);
  solve_cmd->add_option("--model", model_path, "integrals file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--electrons", electrons, "electron count (default: NELEC)");

  std::string scheme = "dmet";
  std::string fragment;
  double mu = 1e3;
  auto* embed_cmd = app.add_subcommand("embed", "embedding energy of an integrals file");
  add_common(embed_cmd, common, false);
  embed_cmd->add_option("--model", model_path, "integrals file")->required()->check(CLI::ExistingFile);
  embed_cmd->add_option("--electrons", electrons, "electron count (default: NELEC)");
  embed_cmd->add_option("--scheme", scheme, "dmet or huzinaga")
      ->check(CLI::IsMember({"dmet", "huzinaga"}));
  embed_cmd->add_option("--fragment", fragment, "comma-separated modes (dmet) or orbitals")
      ->required();
  embed_cmd->add_option("--mu", mu, "level shift (huzinaga)");

  double eta = 1.0, eps = 1e-3;
  std::string mode = "standard";
  std::string gates;
  GateParams gp;
  auto* cost_cmd = app.add_subcommand("cost", "phase-estimation cost or gate counts");
  cost_cmd->add_option("--eta", eta, "guiding-state overlap");
  cost_cmd->add_option("--eps", eps, "target precision");
  cost_cmd->add_option("--mode", mode, "standard|amplified|single-ancilla|high-overlap");
  cost_cmd->add_option("--gates", gates, "givens|sos|bounded-excitation|mps");
  cost_cmd->add_option("--N", gp.n_modes, "modes");
  cost_cmd->add_option("--n", gp.electrons, "electrons");
  cost_cmd->add_option("--L", gp.terms, "determinants");
  cost_cmd->add_option("--k", gp.excitations, "excitation order");
  cost_cmd->add_option("--D", gp.bond_dim, "bond dimension");

  std::string builder = "impurity", write_path;
  int modes = 10, impurity_modes = 2, sites = 2;
  double gap = 0.0, t = 1.0, u = 0.0;
  std::uint64_t model_seed = 1;
  int model_electrons = -1;
  auto* model_cmd = app.add_subcommand("model", "build a model and write its integrals file");
  model_cmd->add_option("--builder", builder, "hubbard|random|impurity")
      ->check(CLI::IsMember({"hubbard", "random", "impurity"}));
  model_cmd->add_option("--modes", modes, "modes (random, impurity)");
  model_cmd->add_option("--impurity-modes", impurity_modes, "interacting modes (impurity)");
  model_cmd->add_option("--gap", gap, "single-particle gap (impurity)");
  model_cmd->add_option("--sites", sites, "sites (hubbard)");
  model_cmd->add_option("--t", t, "hopping (hubbard)");
  model_cmd->add_option("--u", u, "on-site repulsion (hubbard)");
  model_cmd->add_option("--seed", model_seed, "seed");
  model_cmd->add_option("--electrons", model_electrons, "NELEC written to the header")->required();
  model_cmd->add_option("--write", write_path, "output integrals file")->required();

  CLI11_PARSE(app, argc, argv);
  set_thread_count(common.threads);

  try {
    if (*run_cmd || *validate_cmd) {
      ExperimentConfig cfg;
      try {
        cfg = load_with_overrides(common);
      } catch (const ConfigError& e) {
        print_diagnostics({{"", e.what()}});
        return kInvalid;
      }
      if (*validate_cmd) {
        const auto diags = validate(cfg);
        print_diagnostics(diags);
        return diags.empty() ? kOk : kInvalid;
      }
      const RunResult r = run(cfg);
      if (r.exit_code == kInvalid) {
        print_diagnostics(r.diagnostics);
      } else if (r.exit_code == kRuntime) {
        print_error("runtime", r.error);
      } else {
        for (const TaskOutput& o : r.outputs)
          std::cout << o.type << " -> " << o.csv.string() << " (" << o.rows << " rows)\n";
      }
      return r.exit_code;
    }

    if (common.max_dim) set_max_sector_dim(*common.max_dim);

    if (*solve_cmd || *embed_cmd) {
      IntegralFile f = read_integrals(model_path);
      const int n = electrons.value_or(f.electrons);
      json out = {{"model_hash", model_hash(f.integrals)}, {"electrons", n}};
      SolverOptions opts;
      if (common.seed) opts.seed = *common.seed;
      if (*solve_cmd) {
        out.update(ground_json(ground_state(f.integrals, n, opts)));
      } else {
        const MeanFieldResult mf = hartree_fock(f.integrals, n);
        const std::vector<int> frag = parse_modes(fragment);
        const EmbeddingProblem prob =
            scheme == "dmet" ? dmet_effective(f.integrals, schmidt_bath(mf.determinant, frag))
                             : huzinaga_effective(f.integrals, mf, frag, mu);
        const EmbeddingResult r = embed_solve(prob, opts);
        out["scheme"] = scheme;
        out["active_modes"] = prob.active_count;
        out["active_electrons"] = prob.n_active;
        out["total_energy"] = r.total_energy;
        out["hf_energy"] = mf.energy;
        out["leakage"] = r.leakage;
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    }

    if (*cost_cmd) {
      json out;
      if (!gates.empty()) {
        const GateCounts c = guiding_gate_counts(parse_guiding_kind(gates), gp);
        out = {{"kind", to_string(c.kind)}, {"two_qubit", c.two_qubit},
               {"toffoli", c.toffoli ? json(*c.toffoli) : json(nullptr)},
               {"disclaimer", c.disclaimer}};
      } else {
        const CostReport r = qpe_cost(eta, eps, parse_qpe_mode(mode));
        out = {{"mode", to_string(r.mode)},
               {"eta", r.eta},
               {"eps", r.eps},
               {"repetitions", r.repetitions},
               {"max_evolution_time", r.max_evolution_time},
               {"total_evolution_time", r.total_evolution_time},
               {"delta", r.delta},
               {"assumptions", r.assumptions}};
      }
      std::cout << out.dump(2) << "\n";
      return kOk;
    }

    if (*model_cmd) {
      MolecularIntegrals m;
      if (builder == "hubbard") {
        m = spin_double(hubbard_chain(sites, t, u));
      } else if (builder == "random") {
        m = random_integrals(modes, model_seed);
      } else {
        EpsilonSpec es;
        es.band = gap;
        m = build_impurity_model(modes, impurity_modes, es, ImpuritySpec{}, model_seed).integrals;
      }
      write_integrals(m, model_electrons, write_path);
      std::cout << json{{"path", write_path}, {"model_hash", model_hash(m)}}.dump() << "\n";
      return kOk;
    }
  } catch (const InvalidArgument& e) {
    print_error("invalid-argument", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return kRuntime;
  }
  return kOk;
}
