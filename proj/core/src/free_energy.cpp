#include "pspin/free_energy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct BatchStats {
  double mean = 0.0;
  double std_error = 0.0;
};

BatchStats batch_means(const std::vector<double>& xs, int batches) {
  BatchStats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const std::size_t size = xs.size() / static_cast<std::size_t>(batches);
  if (size == 0 || batches < 2) return s;
  std::vector<double> means;
  for (int k = 0; k < batches; ++k) {
    const auto first = xs.begin() + static_cast<std::ptrdiff_t>(k * size);
    means.push_back(std::accumulate(first, first + static_cast<std::ptrdiff_t>(size), 0.0) / static_cast<double>(size));
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= (batches - 1);
  s.std_error = std::sqrt(var / batches);
  return s;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> draw_start(const DomainSpec& domain, int n, double cap, std::uint64_t key) {
  if (std::isfinite(cap)) {
    if (!domain.is_l2()) throw ConfigError("sup-norm caps are only supported on the l2 sphere");
    return sample_delocalized(n, cap, key).coords;
  }
  CounterRng rng(key);
  return sample_domain(domain, n, rng);
}

// Metropolis chain for the Gibbs measure exp(b H) d mu, optionally restricted to |x_i| <= cap.
class Chain {
 public:
  Chain(const Hamiltonian& h, const GibbsSamplerConfig& cfg, std::vector<double> start, std::uint64_t key)
      : h_(h),
        n_(h.dim()),
        quadratic_(h.is_quadratic()),
        cap_(cfg.sup_cap),
        target_(cfg.target_acceptance),
        scale_(cfg.proposal_scale),
        rng_(key),
        x_(Eigen::Map<const Eigen::VectorXd>(start.data(), static_cast<Eigen::Index>(start.size()))) {
    if (quadratic_) {
      has_q_ = h.quadratic_form().rows() == n_;
      has_b_ = h.linear_field().size() == n_;
      max_scale_ = kPi;
      if (const auto* part = h.domain().partition()) {
        for (int i = 0; i < n_; ++i) block_of_.push_back(part->species_of(i));
        for (int s = 0; s < part->species_count(); ++s) blocks_.push_back(part->block(s));
      } else {
        block_of_.assign(static_cast<std::size_t>(n_), 0);
        blocks_.emplace_back(static_cast<std::size_t>(n_));
        std::iota(blocks_[0].begin(), blocks_[0].end(), 0);
      }
    } else {
      max_scale_ = 10.0;
    }
    resync();
  }

  double energy() const noexcept { return energy_; }
  double scale() const noexcept { return scale_; }
  double max_scale() const noexcept { return max_scale_; }

  void swap_state(Chain& other) noexcept {
    x_.swap(other.x_);
    hq_.swap(other.hq_);
    std::swap(energy_, other.energy_);
  }

  /// One sweep at inverse temperature b; returns the acceptance fraction.
  double sweep(double b, bool adapt) {
    const double acc = quadratic_ ? pair_sweep(b) : global_move(b);
    window_accepts_ += acc * (quadratic_ ? n_ : 1);
    window_moves_ += quadratic_ ? n_ : 1;
    if (adapt && window_moves_ >= std::max(50, n_)) {
      const double rate = window_accepts_ / window_moves_;
      scale_ = std::clamp(scale_ * std::exp(rate - target_), 1e-7, max_scale_);
      window_accepts_ = window_moves_ = 0.0;
    }
    if (quadratic_ && ++since_sync_ >= 25) resync();
    return acc;
  }

 private:
  void resync() {
    std::span<double> xs(x_.data(), static_cast<std::size_t>(n_));
    retract(h_.domain(), xs);
    if (quadratic_) {
      hq_ = has_q_ ? Eigen::VectorXd(h_.quadratic_form() * x_) : Eigen::VectorXd::Zero(n_);
    }
    energy_ = h_.value(xs);
    if (!std::isfinite(energy_)) throw NumericError("non-finite energy in Metropolis chain");
    since_sync_ = 0;
  }

  double pair_sweep(double b) {
    const Eigen::MatrixXd* q = has_q_ ? &h_.quadratic_form() : nullptr;
    const Eigen::VectorXd* lin = has_b_ ? &h_.linear_field() : nullptr;
    int accepted = 0;
    for (int move = 0; move < n_; ++move) {
      const int i = static_cast<int>(rng_() % static_cast<std::uint64_t>(n_));
      const auto& block = blocks_[static_cast<std::size_t>(block_of_[static_cast<std::size_t>(i)])];
      if (block.size() < 2) continue;
      int j = i;
      while (j == i) j = block[rng_() % block.size()];
      const double theta = scale_ * (2.0 * rng_.uniform() - 1.0);
      const double c = std::cos(theta), s = std::sin(theta);
      const double xi = x_[i], xj = x_[j];
      const double ni = c * xi - s * xj;
      const double nj = s * xi + c * xj;
      if (std::abs(ni) > cap_ || std::abs(nj) > cap_) continue;
      const double di = ni - xi, dj = nj - xj;
      double delta = 0.0;
      if (q) {
        delta += 2.0 * (di * hq_[i] + dj * hq_[j]) + (*q)(i, i) * di * di + (*q)(j, j) * dj * dj +
                 2.0 * (*q)(i, j) * di * dj;
      }
      if (lin) delta += (*lin)[i] * di + (*lin)[j] * dj;
      if (b * delta < 0.0 && std::log(rng_.uniform()) >= b * delta) continue;
      x_[i] = ni;
      x_[j] = nj;
      if (q) hq_ += di * q->col(i) + dj * q->col(j);
      energy_ += delta;
      ++accepted;
    }
    return static_cast<double>(accepted) / n_;
  }

  double global_move(double b) {
    std::normal_distribution<double> normal;
    std::vector<double> y(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) y[static_cast<std::size_t>(i)] = x_[i] + scale_ * normal(rng_);
    retract(h_.domain(), y);
    if (max_abs(y) > cap_) return 0.0;
    const double e = h_.value(y);
    if (!std::isfinite(e)) throw NumericError("non-finite energy in Metropolis chain");
    const double delta = e - energy_;
    if (b * delta < 0.0 && std::log(rng_.uniform()) >= b * delta) return 0.0;
    x_ = Eigen::Map<const Eigen::VectorXd>(y.data(), n_);
    energy_ = e;
    return 1.0;
  }

  const Hamiltonian& h_;
  int n_;
  bool quadratic_;
  bool has_q_ = false;
  bool has_b_ = false;
  double cap_;
  double target_;
  double scale_;
  double max_scale_ = kPi;
  CounterRng rng_;
  Eigen::VectorXd x_;
  Eigen::VectorXd hq_;
  double energy_ = 0.0;
  std::vector<int> block_of_;
  std::vector<std::vector<int>> blocks_;
  double window_accepts_ = 0.0;
  double window_moves_ = 0.0;
  int since_sync_ = 0;
};

double trapezoid(std::span<const double> grid, std::span<const double> values, const std::vector<std::size_t>& use) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < use.size(); ++k) {
    const auto a = use[k], b = use[k + 1];
    acc += 0.5 * (grid[b] - grid[a]) * (values[a] + values[b]);
  }
  return acc;
}

bool suspicious(double acceptance, double scale, double max_scale) {
  if (acceptance < 0.05) return true;
  return acceptance > 0.95 && scale < max_scale;
}

}  // namespace

void GibbsSamplerConfig::validate() const {
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  if (sweeps <= burn_in) throw ConfigError("sweeps must exceed burn_in");
  if (batches < 2 || batches > sweeps - burn_in) throw ConfigError("batches must lie in [2, sweeps - burn_in]");
  if (!(proposal_scale > 0.0)) throw ConfigError("proposal scale must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) throw ConfigError("target acceptance must lie in (0, 1)");
  if (!(sup_cap > 0.0)) throw ConfigError("sup-norm cap must be positive");
}

std::vector<double> geometric_grid(double beta, int points) {
  if (!(beta > 0.0)) throw ConfigError("grid needs beta > 0");
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g{0.0};
  if (points == 2) {
    g.push_back(beta);
    return g;
  }
  const int m = points - 1;
  const double ratio = std::pow(1000.0, 1.0 / (m - 1));
  for (int k = 0; k < m; ++k) g.push_back(beta * std::pow(ratio, k - (m - 1)));
  g.back() = beta;
  return g;
}

std::vector<double> linear_grid(double beta, int points) {
  if (!(beta > 0.0)) throw ConfigError("grid needs beta > 0");
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  std::vector<double> g;
  for (int k = 0; k < points; ++k) g.push_back(beta * k / (points - 1));
  g.back() = beta;
  return g;
}

std::vector<double> parse_grid(std::string_view spec, double beta) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ConfigError("grid must look like geometric:20 or linear:20");
  const auto kind = spec.substr(0, colon);
  const auto count = spec.substr(colon + 1);
  int points = 0;
  auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), points);
  if (ec != std::errc() || ptr != count.data() + count.size()) throw ConfigError("bad grid size in '" + std::string(spec) + "'");
  if (kind == "geometric") return geometric_grid(beta, points);
  if (kind == "linear") return linear_grid(beta, points);
  throw ConfigError("unknown grid kind '" + std::string(kind) + "'");
}

SpinConfiguration sample_uniform_sphere(int n, std::uint64_t seed) {
  if (n < 1) throw ShapeError("sphere dimension must be >= 1");
  CounterRng rng(derive_stream(seed, {tag(Purpose::sphere)}));
  return {sample_domain(DomainSpec::l2(), n, rng), DomainSpec::l2()};
}

SpinConfiguration sample_delocalized(int n, double cap, std::uint64_t seed) {
  if (n < 1) throw ShapeError("sphere dimension must be >= 1");
  // Every point of the sphere has a coordinate of size >= 1.
  if (cap < 1.0) throw ConfigError("delocalization cap below 1 has acceptance 0");
  constexpr std::uint64_t kAttempts = 1'000'000;
  for (std::uint64_t k = 0; k < kAttempts; ++k) {
    CounterRng rng(derive_stream(seed, {tag(Purpose::sphere), k}));
    auto x = sample_domain(DomainSpec::l2(), n, rng);
    if (max_abs(x) <= cap) return {std::move(x), DomainSpec::l2()};
  }
  throw ConfigError("delocalized sampler acceptance below 1e-6 (0 of " + std::to_string(kAttempts) + " draws)");
}

FreeEnergyEstimate free_energy_ti(const Hamiltonian& h, double beta, std::span<const double> grid,
                                  const GibbsSamplerConfig& config, std::uint64_t seed) {
  config.validate();
  if (h.domain().lq_sphere() != nullptr) throw ConfigError("free energy on l_q spheres is not supported");
  if (grid.empty() || grid.front() != 0.0 || grid.back() != beta) {
    throw ConfigError("grid must start at 0 and end at beta");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ConfigError("grid must be strictly increasing");
  }

  const int n = h.dim();
  const double nd = n;
  const std::size_t points = grid.size();
  const int measured = config.sweeps - config.burn_in;
  const bool tempering = config.tempering == TemperingMode::on;

  FreeEnergyEstimate est;
  est.beta = beta;
  est.grid.assign(grid.begin(), grid.end());
  est.mean_energy.assign(points, 0.0);
  est.energy_std_error.assign(points, 0.0);
  est.acceptance.assign(points, 1.0);
  est.method = tempering ? "tempering" : "ti";
  if (points == 1) return est;

  // b = 0: exact independent draws from the (restricted) uniform measure.
  {
    std::vector<double> e(static_cast<std::size_t>(measured));
    parallel_for(e.size(), [&](std::size_t s) {
      const auto x = draw_start(h.domain(), n, config.sup_cap, derive_stream(seed, {tag(Purpose::sphere), 0, s}));
      e[s] = h.value(x) / nd;
    });
    const auto st = batch_means(e, config.batches);
    est.mean_energy[0] = st.mean;
    est.energy_std_error[0] = st.std_error;
  }

  auto start_for = [&](std::size_t k) {
    return draw_start(h.domain(), n, config.sup_cap, derive_stream(seed, {tag(Purpose::sphere), 1, k}));
  };
  auto record = [&](std::size_t k, const std::vector<double>& e, double acc_sum, const Chain& c) {
    const auto st = batch_means(e, config.batches);
    est.mean_energy[k] = st.mean;
    est.energy_std_error[k] = st.std_error;
    est.acceptance[k] = acc_sum / measured;
    if (suspicious(est.acceptance[k], c.scale(), c.max_scale())) est.acceptance_warning = true;
  };

  if (!tempering) {
    Chain chain(h, config, start_for(0), derive_stream(seed, {tag(Purpose::chain), 0}));
    for (std::size_t k = 1; k < points; ++k) {
      for (int s = 0; s < config.burn_in; ++s) chain.sweep(grid[k], true);
      std::vector<double> e;
      double acc = 0.0;
      for (int s = 0; s < measured; ++s) {
        acc += chain.sweep(grid[k], false);
        e.push_back(chain.energy() / nd);
      }
      record(k, e, acc, chain);
    }
  } else {
    std::vector<Chain> chains;
    for (std::size_t k = 1; k < points; ++k) {
      chains.emplace_back(h, config, start_for(k), derive_stream(seed, {tag(Purpose::chain), k}));
    }
    CounterRng swap_rng(derive_stream(seed, {tag(Purpose::exchange)}));
    std::vector<std::vector<double>> energies(chains.size());
    std::vector<double> acc(chains.size(), 0.0);
    for (int s = 0; s < config.sweeps; ++s) {
      const bool burning = s < config.burn_in;
      std::vector<double> step_acc(chains.size());
      parallel_for(chains.size(), [&](std::size_t r) { step_acc[r] = chains[r].sweep(grid[r + 1], burning); });
      for (std::size_t r = static_cast<std::size_t>(s % 2); r + 1 < chains.size(); r += 2) {
        const double log_ratio = (grid[r + 2] - grid[r + 1]) * (chains[r].energy() - chains[r + 1].energy());
        if (log_ratio >= 0.0 || std::log(swap_rng.uniform()) < log_ratio) chains[r].swap_state(chains[r + 1]);
      }
      if (burning) continue;
      for (std::size_t r = 0; r < chains.size(); ++r) {
        acc[r] += step_acc[r];
        energies[r].push_back(chains[r].energy() / nd);
      }
    }
    for (std::size_t r = 0; r < chains.size(); ++r) record(r + 1, energies[r], acc[r], chains[r]);
  }

  std::vector<std::size_t> all(points), half;
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t k = 0; k < points; k += 2) half.push_back(k);
  if (half.back() != points - 1) half.push_back(points - 1);

  const double integral = trapezoid(grid, est.mean_energy, all);
  const double coarse = trapezoid(grid, est.mean_energy, half);
  double mc_var = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double left = k > 0 ? grid[k] - grid[k - 1] : 0.0;
    const double right = k + 1 < points ? grid[k + 1] - grid[k] : 0.0;
    const double w = 0.5 * (left + right) / beta;
    mc_var += w * w * est.energy_std_error[k] * est.energy_std_error[k];
  }
  const double quad_err = std::abs(integral - coarse) / (3.0 * beta);
  est.value = integral / beta;
  est.std_error = std::sqrt(mc_var + quad_err * quad_err);
  return est;
}

FreeEnergyEstimate free_energy_ti(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix,
                                  const DomainSpec& domain, double beta, std::span<const double> grid,
                                  const GibbsSamplerConfig& config, std::uint64_t seed) {
  if (domain.lq_sphere() != nullptr) throw ConfigError("free energy on l_q spheres is not supported");
  GibbsSamplerConfig cfg = config;
  if (cfg.tempering == TemperingMode::automatic) {
    // Heuristic dynamical threshold of the replica-symmetric phase.
    const double curvature = mix.xi_second(1.0);
    cfg.tempering = curvature > 0.0 && beta > 1.0 / std::sqrt(curvature) ? TemperingMode::on : TemperingMode::off;
  }
  return free_energy_ti(Hamiltonian(tensors, mix, domain), beta, grid, cfg, seed);
}

double annealed_bound(const MixtureSpec& mix, double beta) { return beta * mix.xi(1.0) / 2.0; }

double lindeberg_free(const LindebergInstance& inst, double x) {
  if (inst.a.empty() || inst.a.size() != inst.b.size()) throw ShapeError("Lindeberg instance needs equal non-empty a, b");
  if (!(inst.beta > 0.0)) throw ConfigError("Lindeberg beta must be positive");
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inst.a.size(); ++i) top = std::max(top, inst.beta * (inst.a[i] * x + inst.b[i]));
  double s = 0.0;
  for (std::size_t i = 0; i < inst.a.size(); ++i) s += std::exp(inst.beta * (inst.a[i] * x + inst.b[i]) - top);
  return (top + std::log(s)) / inst.beta;
}

LindebergDerivatives lindeberg_derivatives(const LindebergInstance& inst, double x) {
  if (inst.a.empty() || inst.a.size() != inst.b.size()) throw ShapeError("Lindeberg instance needs equal non-empty a, b");
  if (!(inst.beta > 0.0)) throw ConfigError("Lindeberg beta must be positive");
  const std::size_t n = inst.a.size();
  std::vector<double> w(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, inst.beta * (inst.a[i] * x + inst.b[i]));
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += (w[i] = std::exp(inst.beta * (inst.a[i] * x + inst.b[i]) - top));
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m += (w[i] /= z) * inst.a[i];
  double c2 = 0.0, c3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = inst.a[i] - m;
    c2 += w[i] * d * d;
    c3 += w[i] * d * d * d;
  }
  return {m, inst.beta * c2, inst.beta * inst.beta * c3};
}

ExchangeGap exchange_gap(const LindebergInstance& inst, const DisorderSpec& law1, const DisorderSpec& law2,
                         int nsamples, std::uint64_t seed) {
  if (nsamples < 2) throw ConfigError("exchange_gap needs at least 2 samples");
  for (const auto* law : {&law1, &law2}) {
    const auto m2 = law->abs_moment(2.0);
    if (!m2 || std::abs(*m2 - 1.0) > 1e-6) {
      throw ContractViolation("exchange_gap laws must have mean 0 and variance 1: " + law->to_string());
    }
  }
  double a_inf = 0.0;
  for (double v : inst.a) a_inf = std::max(a_inf, std::abs(v));

  auto moments = [&](const DisorderSpec& law, std::uint64_t which) {
    double mean = 0.0, m2 = 0.0;
    for (int s = 0; s < nsamples; ++s) {
      CounterRng rng(derive_stream(seed, {tag(Purpose::experiment), which, static_cast<std::uint64_t>(s)}));
      const double f = lindeberg_free(inst, law.draw(rng));
      const double d = f - mean;
      mean += d / (s + 1);
      m2 += d * (f - mean);
    }
    return std::pair{mean, m2 / (nsamples - 1)};
  };
  const auto [m1, v1] = moments(law1, 1);
  const auto [m2, v2] = moments(law2, 2);
  const auto t1 = law1.abs_moment(3.0);
  const auto t2 = law2.abs_moment(3.0);

  ExchangeGap g;
  g.gap = std::abs(m1 - m2);
  g.std_error = std::sqrt((v1 + v2) / nsamples);
  g.bound = (t1 && t2) ? inst.beta * inst.beta * a_inf * a_inf * a_inf * (*t1 + *t2)
                       : std::numeric_limits<double>::infinity();
  g.within_bound = g.gap <= g.bound + 3.0 * g.std_error;
  return g;
}

}  // namespace pspin
