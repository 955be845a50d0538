#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "pspin/disorder.hpp"
#include "pspin/errors.hpp"
#include "pspin/experiments.hpp"
#include "pspin/free_energy.hpp"
#include "pspin/ground_state.hpp"
#include "pspin/parisi.hpp"
#include "pspin/report.hpp"
#include "pspin/tensor_io.hpp"

namespace {

using json = nlohmann::json;

// Flags shared by every experiment subcommand. Each one overrides the
// corresponding config-file value only when given on the command line.
struct ExperimentFlags {
  std::string config;
  std::vector<double> gammas;
  std::vector<std::string> families;
  std::vector<int> sizes;
  int seeds = 0;
  std::uint64_t root_seed = 0;
  double beta = 0.0;
  std::string grid;
  int restarts = 0;
  std::string domain;
  std::vector<double> lambdas;
  int sweeps = 0;
  int burn_in = 0;
  std::string tempering;
  std::string out;
  std::vector<std::string> tolerances;
  bool dump_config = false;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app) {
    opts["config"] = app->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
    opts["gamma"] = app->add_option("--gamma", gammas, "Mixture coefficients gamma_1,gamma_2,...")->delimiter(',');
    opts["family"] = app->add_option("--family", families, "Disorder family (repeatable)");
    opts["sizes"] = app->add_option("--sizes", sizes, "System sizes N")->delimiter(',');
    opts["seeds"] = app->add_option("--seeds", seeds, "Replicates 0..K-1")->check(CLI::PositiveNumber);
    opts["root_seed"] = app->add_option("--root-seed", root_seed, "Root seed");
    opts["beta"] = app->add_option("--beta", beta, "Inverse temperature");
    opts["grid"] = app->add_option("--grid", grid, "Integration grid, geometric:<n> or linear:<n>");
    opts["restarts"] = app->add_option("--restarts", restarts, "Ground-state restarts");
    opts["domain"] = app->add_option("--domain", domain, "l2 or lq:<q>");
    opts["lambdas"] = app->add_option("--lambdas", lambdas, "Signal strengths")->delimiter(',');
    opts["sweeps"] = app->add_option("--sweeps", sweeps, "Sampler sweeps per grid point");
    opts["burn_in"] = app->add_option("--burn-in", burn_in, "Sampler burn-in sweeps");
    opts["tempering"] = app->add_option("--tempering", tempering, "off, on or auto");
    opts["out"] = app->add_option("--out", out, "Output CSV path");
    opts["tol"] = app->add_option("--tol", tolerances, "Tolerance stat=limit (repeatable)");
    app->add_flag("--dump-config", dump_config, "Print the resolved config and exit");
  }

  bool given(const std::string& key) const { return opts.at(key)->count() > 0; }

  pspin::ExperimentConfig resolve(const std::string& experiment) const {
    pspin::ExperimentConfig cfg;
    if (given("config")) cfg = pspin::ExperimentConfig::load(config);
    cfg.experiment = experiment;
    if (given("gamma")) cfg.gammas = gammas;
    if (given("family")) cfg.families = families;
    if (given("sizes")) cfg.sizes = sizes;
    if (given("seeds")) {
      cfg.seeds.resize(static_cast<std::size_t>(seeds));
      std::iota(cfg.seeds.begin(), cfg.seeds.end(), 0);
    }
    if (given("root_seed")) cfg.root_seed = root_seed;
    if (given("beta")) cfg.beta = beta;
    if (given("grid")) cfg.grid = grid;
    if (given("restarts")) cfg.gs.restarts = restarts;
    if (given("domain")) cfg.domain = domain;
    if (given("lambdas")) cfg.lambdas = lambdas;
    if (given("sweeps")) cfg.sampler.sweeps = sweeps;
    if (given("burn_in")) cfg.sampler.burn_in = burn_in;
    if (given("tempering")) {
      if (tempering == "off") cfg.sampler.tempering = pspin::TemperingMode::off;
      else if (tempering == "on") cfg.sampler.tempering = pspin::TemperingMode::on;
      else if (tempering == "auto") cfg.sampler.tempering = pspin::TemperingMode::automatic;
      else throw pspin::ConfigError("--tempering must be off, on or auto");
    }
    if (given("out")) cfg.output = out;
    for (const auto& t : tolerances) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw pspin::ConfigError("--tol expects stat=limit, got '" + t + "'");
      try {
        cfg.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
      } catch (const std::exception&) {
        throw pspin::ConfigError("--tol limit is not a number: '" + t + "'");
      }
    }
    cfg.validate();
    return cfg;
  }
};

int run_experiment_command(const ExperimentFlags& flags, const std::string& experiment) {
  const auto cfg = flags.resolve(experiment);
  if (flags.dump_config) {
    std::cout << cfg.to_json() << '\n';
    return 0;
  }
  auto rows = pspin::run_experiment(cfg);
  const auto files = pspin::write_report(rows, cfg.output, cfg.tolerances);
  std::cout << pspin::markdown_summary(rows, cfg.tolerances);
  std::cerr << "wrote " << files.csv.string() << ", " << files.jsonl.string() << ", " << files.markdown.string()
            << '\n';
  return 0;
}

json profile_json(const pspin::MinimizeResult& r) {
  return {{"value", r.value.value},
          {"terms", r.value.terms},
          {"breakpoints", r.profile.breakpoints()},
          {"values", r.profile.values()},
          {"q_hat", r.profile.q_hat()},
          {"converged", r.converged},
          {"evaluations", r.evaluations}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical mixed p-spin experiments"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Sample a disorder tensor and write it with a JSON sidecar");
  int gen_p = 2, gen_n = 100;
  std::string gen_family = "gaussian", gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--p", gen_p, "Tensor order")->required();
  gen->add_option("--n", gen_n, "Dimension N")->required();
  gen->add_option("--family", gen_family, "Disorder family");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output path")->required();

  // gs and fe accept either experiment flags or a single tensor file.
  std::map<std::string, ExperimentFlags> flags;
  std::map<std::string, CLI::App*> commands;
  const std::vector<std::pair<std::string, std::string>> experiments = {
      {"gs", "Ground-state energy per site"},
      {"fe", "Free energy per site by thermodynamic integration"},
      {"truncate-audit", "Decompose disorder into truncation pieces and audit them"},
      {"universality", "Cross-family ground-state (and free-energy) gaps"},
      {"baiyin", "Spectral edge growth for heavy-tailed p = 2 disorder"},
      {"pca", "Spiked tensor detection curve"},
      {"multispecies", "Product-of-spheres ground states"},
      {"lq", "Ground states on the l_q sphere"},
  };
  for (const auto& [name, help] : experiments) {
    commands[name] = app.add_subcommand(name, help);
    flags[name].attach(commands[name]);
  }
  std::string tensor_path;
  std::uint64_t tensor_seed = 0;
  for (const char* name : {"gs", "fe"}) {
    commands[name]->add_option("--tensor", tensor_path, "Solve one tensor file instead of an experiment grid")
        ->check(CLI::ExistingFile);
    commands[name]->add_option("--seed", tensor_seed, "Solver seed for --tensor");
  }

  // parisi
  auto* par = app.add_subcommand("parisi", "Minimize the Crisanti-Sommers functional (JSON output)");
  std::vector<double> par_gamma{0.0, 1.0};
  double par_beta = 1.0;
  int par_atoms = 3;
  std::vector<double> par_predict;
  pspin::MinimizeConfig par_cfg;
  par->add_option("--gamma", par_gamma, "Mixture coefficients")->delimiter(',');
  par->add_option("--beta", par_beta, "Inverse temperature")->check(CLI::PositiveNumber);
  par->add_option("--atoms", par_atoms, "Atoms of the order parameter")->check(CLI::PositiveNumber);
  par->add_option("--starts", par_cfg.starts, "Multi-start count");
  par->add_option("--predict", par_predict, "Beta sequence for the ground-state extrapolation")->delimiter(',');

  // report
  auto* rep = app.add_subcommand("report", "Merge result CSVs into CSV, JSON-lines and markdown");
  std::vector<std::string> rep_inputs;
  std::string rep_out, rep_tol_file;
  std::vector<std::string> rep_tols;
  rep->add_option("--input", rep_inputs, "Result CSV (repeatable)")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", rep_out, "Output CSV path")->required();
  rep->add_option("--tolerances", rep_tol_file, "JSON object stat -> limit")->check(CLI::ExistingFile);
  rep->add_option("--tol", rep_tols, "Tolerance stat=limit (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto spec = pspin::DisorderSpec::parse(gen_family);
      const auto t = pspin::sample_tensor(gen_p, gen_n, spec, gen_seed);
      pspin::write_tensor(gen_out, t, {spec.to_string(), gen_seed});
      std::cout << gen_out << '\n' << pspin::sidecar_path(gen_out).string() << '\n';
      return 0;
    }
    if (par->parsed()) {
      const pspin::MixtureSpec mix(par_gamma);
      json out;
      out["gammas"] = par_gamma;
      out["beta"] = par_beta;
      out["atoms"] = par_atoms;
      out["annealed_bound"] = pspin::annealed_bound(mix, par_beta);
      out["minimum"] = profile_json(pspin::minimize_cs(mix, par_beta, par_atoms, par_cfg));
      if (!par_predict.empty()) {
        const auto pred = pspin::gs_prediction(mix, par_predict, par_atoms, par_cfg);
        out["gs_prediction"] = {
            {"prediction", pred.prediction}, {"betas", pred.betas}, {"values", pred.values}, {"flagged", pred.flagged}};
      }
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (rep->parsed()) {
      std::vector<pspin::ResultRow> rows;
      for (const auto& in : rep_inputs) {
        auto part = pspin::read_csv(in);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      pspin::Tolerances tol;
      if (!rep_tol_file.empty()) {
        std::ifstream is(rep_tol_file);
        try {
          tol = json::parse(is).get<pspin::Tolerances>();
        } catch (const json::exception& e) {
          throw pspin::ConfigError(rep_tol_file + ": " + e.what());
        }
      }
      for (const auto& t : rep_tols) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw pspin::ConfigError("--tol expects stat=limit, got '" + t + "'");
        tol[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
      }
      const auto files = pspin::write_report(rows, rep_out, tol);
      std::cout << pspin::markdown_summary(rows, tol);
      std::cerr << "wrote " << files.csv.string() << ", " << files.jsonl.string() << ", "
                << files.markdown.string() << '\n';
      return 0;
    }
    for (const auto& [name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      if (!tensor_path.empty()) {
        const auto cfg = flags[name].resolve(name);
        const auto loaded = pspin::read_tensor(tensor_path);
        const int p = loaded.tensor.order();
        std::vector<double> gammas(static_cast<std::size_t>(p), 0.0);
        gammas[static_cast<std::size_t>(p - 1)] = flags[name].given("gamma") ? cfg.mixture().gamma(p) : 1.0;
        const pspin::MixtureSpec mix(gammas);
        const std::vector<pspin::SymmetricTensor> tensors{loaded.tensor};
        const auto domain = cfg.domain_spec();
        const double n = loaded.tensor.dim();
        json out{{"tensor", tensor_path}, {"p", p}, {"N", loaded.tensor.dim()},
                 {"distribution", loaded.header.distribution}};
        if (name == "gs") {
          const auto gs = pspin::solve_gs(tensors, mix, domain, cfg.gs, tensor_seed);
          out["gs_per_site"] = gs.value / n;
          out["converged"] = gs.converged;
          out["restart_values_per_site"] = json::array();
          for (double v : gs.restart_values) out["restart_values_per_site"].push_back(v / n);
        } else {
          if (!cfg.beta) throw pspin::ConfigError("fe --tensor needs --beta");
          const auto grid = pspin::parse_grid(cfg.grid, *cfg.beta);
          const auto fe = pspin::free_energy_ti(tensors, mix, domain, *cfg.beta, grid, cfg.sampler, tensor_seed);
          out["fe_per_site"] = fe.value;
          out["std_error"] = fe.std_error;
          out["method"] = fe.method;
          out["acceptance_warning"] = fe.acceptance_warning;
        }
        std::cout << out.dump(2) << '\n';
        return 0;
      }
      return run_experiment_command(flags[name], name);
    }
  } catch (const pspin::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
