#include "pspin/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <sstream>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"
#include "pspin/truncation.hpp"

namespace pspin {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe m;
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return m;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw InvariantError("median of an empty sample");
  const auto mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid)));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// One (family, N, seed) unit of work.
struct Cell {
  std::size_t family;
  int n;
  std::uint64_t seed;
};

std::vector<Cell> cells_of(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (std::size_t f = 0; f < cfg.families.size(); ++f) {
    for (int n : cfg.sizes) {
      for (auto s : cfg.seeds) cells.push_back({f, n, s});
    }
  }
  return cells;
}

// Runs `body` for every cell in parallel and concatenates the rows in cell order.
template <class Body>
std::vector<ResultRow> for_cells(const std::vector<Cell>& cells, Body&& body) {
  std::vector<std::vector<ResultRow>> parts(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) { parts[i] = body(cells[i]); });
  std::vector<ResultRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
  return rows;
}

ResultRow instance_row(const ExperimentConfig& cfg, const Cell& c, std::string stat, double value,
                       std::optional<double> se, double wall_ms) {
  return {cfg.experiment, "instance", c.n, cfg.families[c.family], c.seed, std::move(stat), value, se, wall_ms};
}

ResultRow aggregate_row(const ExperimentConfig& cfg, std::string kind, int n, std::string family, std::string stat,
                        double value, std::optional<double> se) {
  return {cfg.experiment, std::move(kind), n, std::move(family), std::nullopt, std::move(stat), value, se, 0.0};
}

ResultRow check_row(const ExperimentConfig& cfg, int n, std::string family, std::string stat, bool pass) {
  return aggregate_row(cfg, "check", n, std::move(family), std::move(stat), pass ? 1.0 : 0.0, std::nullopt);
}

// Collects instance values of one statistic keyed by (family, N).
std::map<std::pair<std::string, int>, std::vector<double>> collect(const std::vector<ResultRow>& rows,
                                                                   const std::string& stat) {
  std::map<std::pair<std::string, int>, std::vector<double>> out;
  for (const auto& r : rows) {
    if (r.seed && r.stat == stat) out[{r.family, r.n}].push_back(r.value);
  }
  return out;
}

// Means per (family, N) and cross-family gaps per N for one statistic.
void append_family_gaps(const ExperimentConfig& cfg, std::vector<ResultRow>& rows, const std::string& stat,
                        bool check_shrinking) {
  const auto groups = collect(rows, stat);
  std::map<std::pair<std::string, int>, MeanSe> means;
  for (const auto& [key, xs] : groups) {
    means[key] = mean_se(xs);
    rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, "mean_" + stat, means[key].mean,
                                 means[key].se));
  }
  for (std::size_t a = 0; a < cfg.families.size(); ++a) {
    for (std::size_t b = a + 1; b < cfg.families.size(); ++b) {
      const std::string label = cfg.families[a] + "|" + cfg.families[b];
      std::vector<double> gaps;
      for (int n : cfg.sizes) {
        const auto ia = means.find({cfg.families[a], n});
        const auto ib = means.find({cfg.families[b], n});
        if (ia == means.end() || ib == means.end()) continue;
        const double gap = std::abs(ia->second.mean - ib->second.mean);
        const double pooled = std::hypot(ia->second.se, ib->second.se);
        gaps.push_back(gap);
        rows.push_back(aggregate_row(cfg, "gap", n, label, "gap_" + stat, gap, pooled));
        rows.push_back(aggregate_row(cfg, "gap", n, label, "gap_over_pooled_se_" + stat,
                                     pooled > 0 ? gap / pooled : 0.0, std::nullopt));
      }
      if (check_shrinking && gaps.size() >= 2) {
        bool shrinking = true;
        for (std::size_t k = 1; k < gaps.size(); ++k) shrinking = shrinking && gaps[k] <= gaps[k - 1];
        rows.push_back(check_row(cfg, cfg.sizes.back(), label, "gap_shrinking_" + stat, shrinking));
      }
    }
  }
}

int single_order(const MixtureSpec& mix, const std::string& who) {
  const auto orders = mix.active_orders();
  if (orders.size() != 1) throw ConfigError(who + " needs a pure mixture (one active order)");
  return orders.front();
}

GsResult ground_state(const Hamiltonian& h, const ExperimentConfig& cfg, const Cell& c, std::string_view tag_name) {
  return solve_gs(h, cfg.gs, cell_seed(cfg, tag_name, c.n, cfg.families[c.family], c.seed));
}

// GS/N on the configured domain for every cell, plus optional free energies.
std::vector<ResultRow> gs_cells(const ExperimentConfig& cfg, bool with_oracle) {
  const auto mix = cfg.mixture();
  const auto specs = cfg.disorder_specs();
  const auto domain = cfg.domain_spec();
  const bool pure_p2 = mix.active_orders() == std::vector<int>{2} && domain.is_l2();
  return for_cells(cells_of(cfg), [&](const Cell& c) {
    const auto start = Clock::now();
    const auto& family = cfg.families[c.family];
    const auto tensors = sample_disorder(mix, c.n, specs[c.family], cell_seed(cfg, "disorder", c.n, family, c.seed));
    const Hamiltonian h(tensors, mix, domain);
    const auto gs = ground_state(h, cfg, c, "restart");
    std::vector<ResultRow> rows;
    rows.push_back(instance_row(cfg, c, "gs_per_site", gs.value / c.n, std::nullopt, elapsed_ms(start)));
    rows.push_back(instance_row(cfg, c, "gs_converged", gs.converged ? 1.0 : 0.0, std::nullopt, 0.0));
    if (with_oracle && pure_p2) {
      const auto oracle = eigen_oracle_p2(tensors.front());
      const double og = mix.gamma(2) * oracle.lambda_max / std::sqrt(static_cast<double>(c.n));
      rows.push_back(instance_row(cfg, c, "oracle_gs_per_site", og, std::nullopt, 0.0));
      rows.push_back(instance_row(cfg, c, "oracle_rel_gap", std::abs(og - gs.value / c.n) / std::abs(og),
                                  std::nullopt, 0.0));
    }
    if (cfg.beta) {
      const auto grid = parse_grid(cfg.grid, *cfg.beta);
      const auto fe = free_energy_ti(tensors, mix, domain, *cfg.beta, grid, cfg.sampler,
                                     cell_seed(cfg, "sampler", c.n, family, c.seed));
      rows.push_back(instance_row(cfg, c, "fe_per_site", fe.value, fe.std_error, elapsed_ms(start)));
    }
    return rows;
  });
}

}  // namespace

SpeciesPartition SpeciesConfig::partition_for(int n) const {
  if (fractions.empty()) throw ConfigError("species fractions must be non-empty");
  std::vector<int> sizes;
  int used = 0;
  for (std::size_t s = 0; s + 1 < fractions.size(); ++s) {
    sizes.push_back(static_cast<int>(std::lround(fractions[s] * n)));
    used += sizes.back();
  }
  sizes.push_back(n - used);
  std::vector<double> weights;
  for (int sz : sizes) {
    if (sz < 1) throw ConfigError("every species needs at least one coordinate at N = " + std::to_string(n));
    weights.push_back(static_cast<double>(sz) / n);
  }
  return SpeciesPartition::contiguous(sizes, std::move(weights), couplings);
}

std::vector<DisorderSpec> ExperimentConfig::disorder_specs() const {
  std::vector<DisorderSpec> out;
  for (const auto& f : families) out.push_back(DisorderSpec::parse(f));
  return out;
}

DomainSpec ExperimentConfig::domain_spec() const {
  if (domain == "l2") {
    if (species) return DomainSpec::product(species->partition_for(sizes.front()));
    return DomainSpec::l2();
  }
  if (domain.rfind("lq:", 0) == 0) {
    double q = 0.0;
    try {
      std::size_t used = 0;
      q = std::stod(domain.substr(3), &used);
      if (used != domain.size() - 3) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad domain '" + domain + "'");
    }
    return DomainSpec::lq(q);
  }
  throw ConfigError("unknown domain '" + domain + "' (expected l2 or lq:<q>)");
}

void ExperimentConfig::validate() const {
  if (families.empty()) throw ConfigError("families must be non-empty");
  if (sizes.empty()) throw ConfigError("sizes must be non-empty");
  if (seeds.empty()) throw ConfigError("seeds must be non-empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  for (int n : sizes) {
    if (n < 2) throw ConfigError("sizes must be >= 2");
  }
  (void)mixture();
  (void)disorder_specs();
  (void)domain_spec();
  gs.validate();
  if (beta) {
    if (!(*beta > 0.0)) throw ConfigError("beta must be positive");
    (void)parse_grid(grid, *beta);
    sampler.validate();
  }
}

namespace {

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
  }
}

std::string tempering_name(TemperingMode m) {
  switch (m) {
    case TemperingMode::off: return "off";
    case TemperingMode::on: return "on";
    case TemperingMode::automatic: return "auto";
  }
  return "auto";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    check_keys(j,
               {"experiment", "gammas", "families", "sizes", "seeds", "seed_count", "root_seed", "beta", "grid", "gs",
                "sampler", "domain", "lambdas", "species", "moment_eps", "tolerances", "output"},
               "config");
    read(j, "experiment", c.experiment);
    read(j, "gammas", c.gammas);
    read(j, "families", c.families);
    read(j, "sizes", c.sizes);
    read(j, "seeds", c.seeds);
    if (j.contains("seed_count")) {
      const int k = j.at("seed_count").get<int>();
      if (k < 1) throw ConfigError("seed_count must be >= 1");
      c.seeds.resize(static_cast<std::size_t>(k));
      std::iota(c.seeds.begin(), c.seeds.end(), 0);
    }
    read(j, "root_seed", c.root_seed);
    if (j.contains("beta") && !j.at("beta").is_null()) c.beta = j.at("beta").get<double>();
    read(j, "grid", c.grid);
    if (j.contains("gs")) {
      const auto& g = j.at("gs");
      check_keys(g, {"restarts", "max_iters", "initial_step", "backtrack", "tolerance", "bb_steps"}, "gs");
      read(g, "restarts", c.gs.restarts);
      read(g, "max_iters", c.gs.max_iters);
      read(g, "initial_step", c.gs.initial_step);
      read(g, "backtrack", c.gs.backtrack);
      read(g, "tolerance", c.gs.tolerance);
      read(g, "bb_steps", c.gs.bb_steps);
    }
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      check_keys(s, {"sweeps", "burn_in", "proposal_scale", "target_acceptance", "batches", "tempering", "sup_cap"},
                 "sampler");
      read(s, "sweeps", c.sampler.sweeps);
      read(s, "burn_in", c.sampler.burn_in);
      read(s, "proposal_scale", c.sampler.proposal_scale);
      read(s, "target_acceptance", c.sampler.target_acceptance);
      read(s, "batches", c.sampler.batches);
      read(s, "sup_cap", c.sampler.sup_cap);
      if (s.contains("tempering")) {
        const auto t = s.at("tempering").get<std::string>();
        if (t == "off") c.sampler.tempering = TemperingMode::off;
        else if (t == "on") c.sampler.tempering = TemperingMode::on;
        else if (t == "auto") c.sampler.tempering = TemperingMode::automatic;
        else throw ConfigError("tempering must be off, on or auto");
      }
    }
    read(j, "domain", c.domain);
    read(j, "lambdas", c.lambdas);
    if (j.contains("species") && !j.at("species").is_null()) {
      const auto& s = j.at("species");
      check_keys(s, {"fractions", "couplings"}, "species");
      SpeciesConfig sc;
      read(s, "fractions", sc.fractions);
      if (s.contains("couplings")) {
        for (auto it = s.at("couplings").begin(); it != s.at("couplings").end(); ++it) {
          const int p = std::stoi(it.key());
          if (p < 1 || p > kMaxOrder) throw ConfigError("coupling order out of range: " + it.key());
          if (static_cast<int>(sc.couplings.size()) < p) sc.couplings.resize(static_cast<std::size_t>(p));
          sc.couplings[static_cast<std::size_t>(p - 1)] = it.value().get<std::vector<double>>();
        }
      }
      const std::size_t r = sc.fractions.size();
      for (std::size_t p = 0; p < sc.couplings.size(); ++p) {
        std::size_t cells = 1;
        for (std::size_t k = 0; k <= p; ++k) cells *= r;
        if (sc.couplings[p].empty()) sc.couplings[p].assign(cells, 0.0);
      }
      c.species = std::move(sc);
    }
    read(j, "moment_eps", c.moment_eps);
    if (j.contains("tolerances")) c.tolerances = j.at("tolerances").get<Tolerances>();
    read(j, "output", c.output);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["gammas"] = gammas;
  j["families"] = families;
  j["sizes"] = sizes;
  j["seeds"] = seeds;
  j["root_seed"] = root_seed;
  j["beta"] = beta ? json(*beta) : json(nullptr);
  j["grid"] = grid;
  j["gs"] = {{"restarts", gs.restarts},   {"max_iters", gs.max_iters}, {"initial_step", gs.initial_step},
             {"backtrack", gs.backtrack}, {"tolerance", gs.tolerance}, {"bb_steps", gs.bb_steps}};
  j["sampler"] = {{"sweeps", sampler.sweeps},
                  {"burn_in", sampler.burn_in},
                  {"proposal_scale", sampler.proposal_scale},
                  {"target_acceptance", sampler.target_acceptance},
                  {"batches", sampler.batches},
                  {"tempering", tempering_name(sampler.tempering)}};
  if (std::isfinite(sampler.sup_cap)) j["sampler"]["sup_cap"] = sampler.sup_cap;
  j["domain"] = domain;
  j["lambdas"] = lambdas;
  if (species) {
    json cp = json::object();
    for (std::size_t p = 0; p < species->couplings.size(); ++p) cp[std::to_string(p + 1)] = species->couplings[p];
    j["species"] = {{"fractions", species->fractions}, {"couplings", cp}};
  }
  j["moment_eps"] = moment_eps;
  j["tolerances"] = tolerances;
  j["output"] = output;
  return j.dump(2);
}

namespace {

// Validated copy with family names in canonical form, so row labels and
// stream keys do not depend on how a family was spelled.
ExperimentConfig prepared(const ExperimentConfig& input) {
  input.validate();
  ExperimentConfig cfg = input;
  for (auto& f : cfg.families) f = DisorderSpec::parse(f).to_string();
  if (std::set<std::string>(cfg.families.begin(), cfg.families.end()).size() != cfg.families.size()) {
    throw ConfigError("families must be distinct");
  }
  return cfg;
}

}  // namespace

std::uint64_t cell_seed(const ExperimentConfig& cfg, std::string_view purpose, int n, std::string_view family,
                        std::uint64_t replicate) {
  return derive_stream(cfg.root_seed, {tag(Purpose::experiment), fnv1a(cfg.experiment), fnv1a(purpose),
                                       static_cast<std::uint64_t>(n), fnv1a(family), replicate});
}

std::vector<SymmetricTensor> sample_disorder(const MixtureSpec& mix, int n, const DisorderSpec& spec,
                                             std::uint64_t seed) {
  std::vector<SymmetricTensor> out;
  for (int p : mix.active_orders()) out.push_back(sample_tensor(p, n, spec, seed));
  return out;
}

void require_moment_bounds(const ExperimentConfig& cfg) {
  const int p = cfg.mixture().max_order();
  for (const auto& spec : cfg.disorder_specs()) {
    const auto rep = moment_report(spec, p, cfg.moment_eps);
    if (!rep.ce_bounds_hold) {
      throw ConfigError("family " + spec.to_string() + " violates the moment hypothesis: " + rep.violation);
    }
  }
}

std::vector<ResultRow> run_gs(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  auto rows = gs_cells(cfg, true);
  append_family_gaps(cfg, rows, "gs_per_site", false);
  if (cfg.beta) append_family_gaps(cfg, rows, "fe_per_site", false);
  for (const auto& [key, xs] : collect(rows, "oracle_rel_gap")) {
    rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, "max_oracle_rel_gap",
                                 *std::max_element(xs.begin(), xs.end()), std::nullopt));
  }
  return rows;
}

std::vector<ResultRow> run_fe(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  if (!cfg.beta) throw ConfigError("fe needs beta");
  const auto mix = cfg.mixture();
  const auto specs = cfg.disorder_specs();
  const auto domain = cfg.domain_spec();
  const auto grid = parse_grid(cfg.grid, *cfg.beta);
  auto rows = for_cells(cells_of(cfg), [&](const Cell& c) {
    const auto start = Clock::now();
    const auto& family = cfg.families[c.family];
    const auto tensors = sample_disorder(mix, c.n, specs[c.family], cell_seed(cfg, "disorder", c.n, family, c.seed));
    const auto fe = free_energy_ti(tensors, mix, domain, *cfg.beta, grid, cfg.sampler,
                                   cell_seed(cfg, "sampler", c.n, family, c.seed));
    std::vector<ResultRow> out;
    out.push_back(instance_row(cfg, c, "fe_per_site", fe.value, fe.std_error, elapsed_ms(start)));
    out.push_back(instance_row(cfg, c, "acceptance_warning", fe.acceptance_warning ? 1.0 : 0.0, std::nullopt, 0.0));
    out.push_back(instance_row(cfg, c, "annealed_bound", annealed_bound(mix, *cfg.beta), std::nullopt, 0.0));
    return out;
  });
  append_family_gaps(cfg, rows, "fe_per_site", false);
  return rows;
}

std::vector<ResultRow> run_universality(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  require_moment_bounds(cfg);
  auto rows = gs_cells(cfg, false);
  append_family_gaps(cfg, rows, "gs_per_site", cfg.sizes.size() >= 2);
  if (cfg.beta) append_family_gaps(cfg, rows, "fe_per_site", cfg.sizes.size() >= 2);
  return rows;
}

PairedBootstrap paired_median_trend(const std::vector<std::vector<double>>& values, int resamples,
                                    std::uint64_t seed) {
  if (values.empty() || values.front().size() < 2) throw ConfigError("paired trend needs seeds and >= 2 sizes");
  if (resamples < 1) throw ConfigError("paired trend needs at least one resample");
  const std::size_t seeds = values.size();
  const std::size_t sizes = values.front().size();
  auto increasing = [](const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k) {
      if (!(v[k] > v[k - 1])) return false;
    }
    return true;
  };
  PairedBootstrap out{0.0, 0.0};
  for (const auto& v : values) out.per_seed_fraction += increasing(v) ? 1.0 : 0.0;
  out.per_seed_fraction /= static_cast<double>(seeds);

  CounterRng rng(derive_stream(seed, {tag(Purpose::experiment), fnv1a("bootstrap")}));
  int hits = 0;
  std::vector<double> column(seeds), medians(sizes);
  std::vector<std::size_t> pick(seeds);
  for (int b = 0; b < resamples; ++b) {
    for (auto& i : pick) i = static_cast<std::size_t>(rng() % seeds);
    for (std::size_t k = 0; k < sizes; ++k) {
      for (std::size_t s = 0; s < seeds; ++s) column[s] = values[pick[s]][k];
      medians[k] = median(column);
    }
    hits += increasing(medians) ? 1 : 0;
  }
  out.increasing_fraction = static_cast<double>(hits) / resamples;
  return out;
}

std::vector<ResultRow> run_baiyin_necessity(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  const auto mix = cfg.mixture();
  if (mix.active_orders() != std::vector<int>{2}) throw ConfigError("baiyin runs the pure p = 2 model");
  if (!std::is_sorted(cfg.sizes.begin(), cfg.sizes.end())) throw ConfigError("baiyin sizes must be increasing");
  const auto specs = cfg.disorder_specs();
  std::vector<bool> heavy;
  for (const auto& s : specs) heavy.push_back(!moment_report(s, 2, cfg.moment_eps).moment_2p_finite);
  if (std::none_of(heavy.begin(), heavy.end(), [](bool h) { return h; })) {
    throw ConfigError("baiyin needs at least one family with infinite fourth moment");
  }

  // One cell per (family, seed); the seed's tensors are nested across N.
  std::vector<Cell> cells;
  for (std::size_t f = 0; f < cfg.families.size(); ++f) {
    for (auto s : cfg.seeds) cells.push_back({f, 0, s});
  }
  const int n_max = cfg.sizes.back();
  auto rows = for_cells(cells, [&](const Cell& c) {
    const auto& family = cfg.families[c.family];
    const auto full = sample_tensor(2, n_max, specs[c.family], cell_seed(cfg, "disorder", 0, family, c.seed));
    std::vector<ResultRow> out;
    for (int n : cfg.sizes) {
      const auto start = Clock::now();
      SymmetricTensor j(2, n, std::vector<double>(full.entries().begin(), full.entries().begin() +
                                                                              static_cast<std::ptrdiff_t>(canonical_count(n, 2))));
      const auto oracle = eigen_oracle_p2(j, 1e-10);
      const double nd = n;
      const Cell at{c.family, n, c.seed};
      out.push_back(instance_row(cfg, at, "edge_ratio", oracle.lambda_max / std::sqrt(2.0 * nd), std::nullopt,
                                 elapsed_ms(start)));
      out.push_back(instance_row(cfg, at, "gs_per_site", mix.gamma(2) * oracle.lambda_max / std::sqrt(nd),
                                 std::nullopt, 0.0));
      out.push_back(instance_row(cfg, at, "oracle_converged", oracle.converged ? 1.0 : 0.0, std::nullopt, 0.0));
      if (heavy[c.family]) {
        const auto params = TruncationParams::bai_yin(n, 2);
        const auto probe = localized_probe(j, mix, params.delta * params.sqrt_n());
        out.push_back(instance_row(cfg, at, "probe_found", probe ? 1.0 : 0.0, std::nullopt, 0.0));
        if (probe) {
          auto r = instance_row(cfg, at, "probe_value_per_site", probe->value_per_site, std::nullopt, 0.0);
          r.kind = "witness";
          out.push_back(r);
        }
      }
    }
    return out;
  });

  for (std::size_t f = 0; f < cfg.families.size(); ++f) {
    const auto& family = cfg.families[f];
    std::map<std::uint64_t, std::vector<double>> by_seed;
    std::vector<double> medians;
    for (int n : cfg.sizes) {
      std::vector<double> xs;
      for (const auto& r : rows) {
        if (r.kind == "instance" && r.family == family && r.n == n && r.stat == "edge_ratio") {
          xs.push_back(r.value);
          by_seed[*r.seed].push_back(r.value);
        }
      }
      medians.push_back(median(xs));
      rows.push_back(aggregate_row(cfg, "aggregate", n, family, "median_edge_ratio", medians.back(), std::nullopt));
      std::vector<double> found;
      for (const auto& r : rows) {
        if (r.family == family && r.n == n && r.stat == "probe_found") found.push_back(r.value);
      }
      if (!found.empty()) {
        const auto m = mean_se(found);
        rows.push_back(aggregate_row(cfg, "aggregate", n, family, "probe_found_fraction", m.mean, m.se));
      }
    }
    if (cfg.sizes.size() >= 2) {
      std::vector<std::vector<double>> paired;
      for (auto& [s, v] : by_seed) paired.push_back(v);
      const auto trend = paired_median_trend(paired, 2000, cfg.root_seed);
      const int n_last = cfg.sizes.back();
      rows.push_back(aggregate_row(cfg, "aggregate", n_last, family, "median_increasing_fraction",
                                   trend.increasing_fraction, std::nullopt));
      rows.push_back(aggregate_row(cfg, "aggregate", n_last, family, "per_seed_increasing_fraction",
                                   trend.per_seed_fraction, std::nullopt));
      const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
      const double spread = (*hi - *lo) / *lo;
      rows.push_back(aggregate_row(cfg, "aggregate", n_last, family, "median_spread", spread, std::nullopt));
      if (heavy[f]) {
        rows.push_back(check_row(cfg, n_last, family, "heavy_median_growth", trend.increasing_fraction >= 0.8));
      } else {
        rows.push_back(check_row(cfg, n_last, family, "light_median_stable", spread <= 0.05));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_truncation_audit(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  const auto mix = cfg.mixture();
  const int p = single_order(mix, "truncation audit");
  const auto specs = cfg.disorder_specs();
  for (const auto& s : specs) {
    const auto rep = moment_report(s, p, cfg.moment_eps);
    if (!rep.moment_2p_finite) throw ConfigError("family " + s.to_string() + " refused: " + rep.violation);
  }
  const auto pure = MixtureSpec::pure(p, 1.0);

  auto rows = for_cells(cells_of(cfg), [&](const Cell& c) {
    const auto start = Clock::now();
    const auto& family = cfg.families[c.family];
    const auto& spec = specs[c.family];
    const auto j = sample_tensor(p, c.n, spec, cell_seed(cfg, "disorder", c.n, family, c.seed));
    const auto params = TruncationParams::defaults(c.n, mix.max_order(), cfg.moment_eps);
    const auto d = truncate(j, params, spec);

    std::vector<ResultRow> out;
    const auto rebuilt = d.reconstruct();
    double err = 0.0;
    for (std::size_t r = 0; r < j.size(); ++r) err = std::max(err, std::abs(rebuilt.entries()[r] - j.entries()[r]));
    out.push_back(instance_row(cfg, c, "reconstruction_error", err, std::nullopt, 0.0));
    const double limit = p == 1 ? params.M1 : params.M;
    out.push_back(instance_row(cfg, c, "small_sup_norm", d.small.sup_norm(), std::nullopt, 0.0));
    out.push_back(instance_row(cfg, c, "small_sup_within_bound", d.small.sup_norm() <= limit ? 1.0 : 0.0,
                               std::nullopt, 0.0));

    auto gsbar = [&](const SymmetricTensor& piece, std::string_view name) {
      if (piece.sup_norm() == 0.0) return 0.0;
      const auto key = cell_seed(cfg, name, c.n, family, c.seed);
      const double up = solve_gs(Hamiltonian(std::vector<SymmetricTensor>{piece}, pure), cfg.gs, key).value;
      const double down = solve_gs(Hamiltonian(std::vector<SymmetricTensor>{-piece}, pure), cfg.gs, key).value;
      return std::max(up, down) / c.n;
    };
    const double small = gsbar(d.small, "gsbar_small");
    out.push_back(instance_row(cfg, c, "gsbar_small", small, std::nullopt, 0.0));
    for (std::size_t k = 0; k < d.scale.size(); ++k) {
      const std::string name = "gsbar_scale" + std::to_string(k);
      out.push_back(instance_row(cfg, c, name, gsbar(d.scale[k], name), std::nullopt, 0.0));
    }
    out.push_back(instance_row(cfg, c, "gsbar_large", gsbar(d.large, "gsbar_large"), std::nullopt, 0.0));
    const double tail = gsbar(d.tail, "gsbar_tail");
    out.push_back(instance_row(cfg, c, "gsbar_tail", tail, std::nullopt, 0.0));
    out.push_back(instance_row(cfg, c, "tail_within_tenth_of_small", tail <= 0.1 * small ? 1.0 : 0.0, std::nullopt,
                               0.0));

    // Empirical small-piece variance per multiplicity class against the analytic profile.
    std::map<std::uint64_t, std::vector<double>> by_class;
    d.small.for_each_canonical([&](std::span<const int> idx, std::uint64_t, double v) {
      by_class[multiplicity(idx)].push_back(v);
    });
    for (const auto& v : small_piece_variances(p, spec, params)) {
      const auto& xs = by_class[v.multiplicity];
      if (xs.size() < 2) continue;
      double m2 = 0.0, m4 = 0.0;
      for (double x : xs) {
        m2 += x * x;
        m4 += x * x * x * x;
      }
      const double cnt = static_cast<double>(xs.size());
      m2 /= cnt;
      m4 /= cnt;
      const std::string suffix = "_m" + std::to_string(v.multiplicity);
      out.push_back(instance_row(cfg, c, "small_variance" + suffix, m2, std::sqrt((m4 - m2 * m2) / cnt), 0.0));
      out.push_back(instance_row(cfg, c, "small_variance_analytic" + suffix, v.variance, std::nullopt, 0.0));
      out.push_back(instance_row(cfg, c, "sandwich_lower" + suffix, v.target * (1.0 - v.delta_tilde), std::nullopt,
                                 0.0));
      out.push_back(instance_row(cfg, c, "sandwich_upper" + suffix, v.target, std::nullopt, 0.0));
    }
    out.front().wall_ms = elapsed_ms(start);
    return out;
  });

  for (const char* stat : {"gsbar_small", "gsbar_large", "gsbar_tail", "tail_within_tenth_of_small",
                           "small_sup_within_bound"}) {
    for (const auto& [key, xs] : collect(rows, stat)) {
      const auto m = mean_se(xs);
      rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, std::string("mean_") + stat, m.mean, m.se));
    }
  }
  for (const auto& [key, xs] : collect(rows, "reconstruction_error")) {
    const double worst = *std::max_element(xs.begin(), xs.end());
    rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, "max_reconstruction_error", worst,
                                 std::nullopt));
    rows.push_back(check_row(cfg, key.second, key.first, "reconstruction_within_1e-8", worst <= 1e-8));
  }
  return rows;
}

std::vector<ResultRow> run_tensor_pca(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  require_moment_bounds(cfg);
  const auto mix = cfg.mixture();
  const int p = single_order(mix, "tensor PCA");
  if (cfg.lambdas.empty()) throw ConfigError("tensor PCA needs a lambda grid");
  const auto specs = cfg.disorder_specs();
  const auto domain = cfg.domain_spec();
  auto label = [](double lambda) { return "gs_per_site@lambda=" + fmt(lambda); };

  auto rows = for_cells(cells_of(cfg), [&](const Cell& c) {
    const auto& family = cfg.families[c.family];
    const auto& spec = specs[c.family];
    const auto tensors = sample_disorder(mix, c.n, spec, cell_seed(cfg, "disorder", c.n, family, c.seed));
    const auto signal = sample_tensor(1, c.n, spec, cell_seed(cfg, "signal", c.n, family, c.seed));
    const std::vector<double> v(signal.entries().begin(), signal.entries().end());
    std::vector<ResultRow> out;
    for (double lambda : cfg.lambdas) {
      const auto start = Clock::now();
      Hamiltonian h(tensors, mix, domain);
      h.add_spike(lambda, v, p);
      const auto gs = ground_state(h, cfg, c, "restart");
      out.push_back(instance_row(cfg, c, label(lambda), gs.value / c.n, std::nullopt, elapsed_ms(start)));
    }
    return out;
  });

  for (double lambda : cfg.lambdas) append_family_gaps(cfg, rows, label(lambda), false);
  const auto base = collect(rows, label(cfg.lambdas.front()));
  for (double lambda : cfg.lambdas) {
    for (const auto& [key, xs] : collect(rows, label(lambda))) {
      const auto& ref = base.at(key);
      std::vector<double> diff;
      for (std::size_t i = 0; i < xs.size(); ++i) diff.push_back(xs[i] - ref[i]);
      const auto m = mean_se(diff);
      rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, "detection@lambda=" + fmt(lambda), m.mean,
                                   m.se));
    }
  }
  return rows;
}

std::vector<ResultRow> run_multispecies(const ExperimentConfig& input) {
  const auto cfg = prepared(input);
  if (!cfg.species) throw ConfigError("multispecies needs a species block");
  require_moment_bounds(cfg);
  const auto& sc = *cfg.species;
  const auto specs = cfg.disorder_specs();
  const int top = static_cast<int>(sc.couplings.size());
  if (top < 1) throw ConfigError("multispecies needs couplings");
  std::vector<double> order_active(static_cast<std::size_t>(top), 0.0);
  for (int p = 1; p <= top; ++p) {
    for (double g : sc.couplings[static_cast<std::size_t>(p - 1)]) {
      if (g != 0.0) order_active[static_cast<std::size_t>(p - 1)] = 1.0;
    }
  }
  const MixtureSpec orders(order_active);
  const bool bipartite = sc.fractions.size() == 2 && top == 2 && orders.active_orders() == std::vector<int>{2} &&
                         sc.couplings[1][0] == 0.0 && sc.couplings[1][3] == 0.0;

  auto rows = for_cells(cells_of(cfg), [&](const Cell& c) {
    const auto start = Clock::now();
    const auto& family = cfg.families[c.family];
    const auto partition = sc.partition_for(c.n);
    const auto domain = DomainSpec::product(partition);
    const auto tensors = sample_disorder(orders, c.n, specs[c.family], cell_seed(cfg, "disorder", c.n, family, c.seed));
    const Hamiltonian h(tensors, orders, domain);
    const auto gs = ground_state(h, cfg, c, "restart");
    std::vector<ResultRow> out;
    out.push_back(instance_row(cfg, c, "gs_per_site", gs.value / c.n, std::nullopt, elapsed_ms(start)));
    if (bipartite) {
      const auto a = tensors.front().to_dense_matrix();
      const auto& b1 = partition.block(0);
      const auto& b2 = partition.block(1);
      const Eigen::MatrixXd b = a.block(b1.front(), b2.front(), static_cast<Eigen::Index>(b1.size()),
                                        static_cast<Eigen::Index>(b2.size()));
      const auto sv = top_singular_value(b);
      const double nd = c.n;
      const double oracle = 2.0 * sc.couplings[1][1] * std::sqrt(partition.weight(0) * partition.weight(1)) *
                            std::sqrt(nd) * sv.sigma_max / nd;
      out.push_back(instance_row(cfg, c, "oracle_gs_per_site", oracle, std::nullopt, 0.0));
      out.push_back(instance_row(cfg, c, "oracle_rel_error", std::abs(gs.value / nd - oracle) / std::abs(oracle),
                                 std::nullopt, 0.0));
    }
    return out;
  });
  append_family_gaps(cfg, rows, "gs_per_site", false);
  for (const auto& [key, xs] : collect(rows, "oracle_rel_error")) {
    rows.push_back(aggregate_row(cfg, "aggregate", key.second, key.first, "max_oracle_rel_error",
                                 *std::max_element(xs.begin(), xs.end()), std::nullopt));
  }
  return rows;
}

std::vector<ResultRow> run_lq(const ExperimentConfig& input) {
  if (input.domain.rfind("lq:", 0) != 0) throw ConfigError("lq needs domain lq:<q> with q > 2");
  try {
    (void)input.domain_spec();
  } catch (const ConfigError&) {
    throw ConfigError("refused: l_q ground-state runs require q in (2, infinity), got " + input.domain);
  }
  if (input.mixture().gamma(1) != 0.0) {
    throw ConfigError("refused: l_q ground-state runs require gamma_1 = 0");
  }
  const auto cfg = prepared(input);
  require_moment_bounds(cfg);
  auto rows = gs_cells(cfg, false);
  append_family_gaps(cfg, rows, "gs_per_site", cfg.sizes.size() >= 2);
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  const auto& e = cfg.experiment;
  if (e == "gs") return run_gs(cfg);
  if (e == "fe") return run_fe(cfg);
  if (e == "universality") return run_universality(cfg);
  if (e == "baiyin") return run_baiyin_necessity(cfg);
  if (e == "truncate-audit" || e == "truncation_audit") return run_truncation_audit(cfg);
  if (e == "pca") return run_tensor_pca(cfg);
  if (e == "multispecies") return run_multispecies(cfg);
  if (e == "lq") return run_lq(cfg);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace pspin
