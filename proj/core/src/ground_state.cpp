#include "pspin/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Removes from g its component along the constraint normal(s) at x.
void project_tangent(const DomainSpec& domain, std::span<const double> x, std::span<double> g) {
  if (auto* q = domain.lq_sphere()) {
    std::vector<double> normal(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) normal[i] = std::copysign(std::pow(std::abs(x[i]), q->q - 1.0), x[i]);
    const double nn = dot(normal, normal);
    if (nn == 0.0) return;
    const double c = dot(g, normal) / nn;
    for (std::size_t i = 0; i < x.size(); ++i) g[i] -= c * normal[i];
    return;
  }
  if (auto* part = domain.partition()) {
    for (int s = 0; s < part->species_count(); ++s) {
      double gx = 0.0, xx = 0.0;
      for (int i : part->block(s)) {
        gx += g[i] * x[i];
        xx += x[i] * x[i];
      }
      if (xx == 0.0) continue;
      for (int i : part->block(s)) g[i] -= gx / xx * x[i];
    }
    return;
  }
  const double c = dot(g, x) / dot(x, x);
  for (std::size_t i = 0; i < x.size(); ++i) g[i] -= c * x[i];
}

void check_finite(std::span<const double> g) {
  for (double v : g) {
    if (!std::isfinite(v)) throw NumericError("non-finite gradient in ground-state solver");
  }
}

struct RestartOutcome {
  double value;
  std::vector<double> x;
  int iterations;
  bool converged;
};

RestartOutcome ascend(const Hamiltonian& h, const GsSolverConfig& cfg, std::vector<double> x) {
  const DomainSpec& domain = h.domain();
  const std::size_t n = x.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  std::vector<double> g(n), rg(n), trial(n), trial_g(n), prev_x, prev_rg;
  double value = h.value_and_gradient(x, g);
  check_finite(g);

  int small_gains = 0;
  double step = 0.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    std::copy(g.begin(), g.end(), rg.begin());
    project_tangent(domain, x, rg);
    const double rg_norm = std::sqrt(dot(rg, rg));
    const double g_norm = std::sqrt(dot(g, g));
    if (rg_norm <= 1e-14 * std::max(1.0, g_norm)) return {value, std::move(x), it, true};

    if (it == 0 || !cfg.bb_steps) {
      step = cfg.initial_step * root_n / std::max(g_norm, 1e-300);
    } else {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = x[i] - prev_x[i];
        const double y = rg[i] - prev_rg[i];
        ss += s * s;
        sy += s * y;
      }
      const double cap = 100.0 * root_n / rg_norm;
      step = std::abs(sy) > 0.0 ? std::min(ss / std::abs(sy), cap) : cap;
    }

    bool accepted = false;
    double trial_value = value;
    for (int k = 0; k < 80; ++k) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * rg[i];
      retract(domain, trial);
      trial_value = h.value_and_gradient(trial, trial_g);
      if (trial_value > value) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack;
    }
    if (!accepted) return {value, std::move(x), it + 1, true};
    check_finite(trial_g);

    const double gain = trial_value - value;
    prev_x = x;
    prev_rg = rg;
    x.swap(trial);
    g.swap(trial_g);
    value = trial_value;
    small_gains = gain <= cfg.tolerance * std::max(1.0, std::abs(value)) ? small_gains + 1 : 0;
    if (small_gains >= 3) return {value, std::move(x), it + 1, true};
  }
  return {value, std::move(x), cfg.max_iters, false};
}

}  // namespace

void GsSolverConfig::validate() const {
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (!(initial_step > 0.0)) throw ConfigError("initial step must be > 0");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("backtracking factor must lie in (0, 1)");
}

GsResult solve_gs(const Hamiltonian& h, const GsSolverConfig& config, std::uint64_t seed) {
  config.validate();
  if (h.domain().lq_sphere() != nullptr && h.has_linear()) {
    throw ContractViolation("l_q ground states require gamma_1 = 0");
  }
  const int n = h.dim();
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  parallel_for(outcomes.size(), [&](std::size_t r) {
    CounterRng rng(derive_stream(seed, {tag(Purpose::restart), r}));
    auto x = sample_domain(h.domain(), n, rng);
    if (config.negate_starts) {
      for (auto& v : x) v = -v;
    }
    outcomes[r] = ascend(h, config, std::move(x));
  });

  GsResult res;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    res.restart_values.push_back(outcomes[r].value);
    res.iterations += outcomes[r].iterations;
    res.converged = res.converged && outcomes[r].converged;
    if (outcomes[r].value > outcomes[best].value) best = r;
  }
  res.argmax = SpinConfiguration{std::move(outcomes[best].x), h.domain()};
  res.value = h.value(res.argmax.coords);
  return res;
}

GsResult solve_gs(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix, const DomainSpec& domain,
                  const GsSolverConfig& config, std::uint64_t seed) {
  if (domain.lq_sphere() != nullptr && mix.gamma(1) != 0.0) {
    throw ContractViolation("l_q ground states require gamma_1 = 0");
  }
  return solve_gs(Hamiltonian(tensors, mix, domain), config, seed);
}

EigenOracleResult top_eigenpair(const Eigen::MatrixXd& a, double tol, int max_matvecs, std::uint64_t seed) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw ShapeError("top_eigenpair needs a non-empty square matrix");
  const Eigen::Index m = std::min<Eigen::Index>(n, 64);

  CounterRng rng(derive_stream(seed, {tag(Purpose::restart), 0xe16e}));
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();

  EigenOracleResult res;
  Eigen::MatrixXd basis(n, m);
  Eigen::VectorXd alpha(m), beta(m);
  double scale = 0.0;
  while (res.matvecs < max_matvecs) {
    basis.col(0) = v;
    Eigen::Index k = m;
    bool breakdown = false;
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::VectorXd w = a * basis.col(j);
      ++res.matvecs;
      alpha[j] = basis.col(j).dot(w);
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      }
      beta[j] = w.norm();
      scale = std::max({scale, std::abs(alpha[j]), beta[j]});
      if (j + 1 < m) {
        if (beta[j] <= 1e-14 * std::max(scale, 1e-300)) {
          k = j + 1;
          breakdown = true;
          break;
        }
        basis.col(j + 1) = w / beta[j];
      }
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < k) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd s = es.eigenvectors().col(k - 1);
    res.lambda_max = es.eigenvalues()[k - 1];
    v = basis.leftCols(k) * s;
    v.normalize();
    const double residual = breakdown ? 0.0 : std::abs(beta[k - 1] * s[k - 1]);
    if (residual <= tol * std::max(scale, 1e-300)) {
      res.converged = true;
      break;
    }
  }
  res.eigenvector.assign(v.data(), v.data() + n);
  return res;
}

EigenOracleResult eigen_oracle_p2(const SymmetricTensor& j2, double tol, int max_matvecs) {
  if (j2.order() != 2) throw ShapeError("eigen_oracle_p2 needs an order-2 tensor");
  return top_eigenpair(j2.to_dense_matrix(), tol, max_matvecs);
}

SingularOracleResult top_singular_value(const Eigen::MatrixXd& b, double tol, int max_iters) {
  if (b.rows() == 0 || b.cols() == 0) throw ShapeError("top_singular_value needs a non-empty matrix");
  SingularOracleResult res;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(b.cols()).normalized();
  Eigen::VectorXd u(b.rows());
  double prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    u.noalias() = b * v;
    const double un = u.norm();
    if (un == 0.0) {
      res.converged = true;
      res.iterations = it + 1;
      return res;
    }
    u /= un;
    v.noalias() = b.transpose() * u;
    res.sigma_max = v.norm();
    v /= res.sigma_max;
    res.iterations = it + 1;
    if (it > 0 && std::abs(res.sigma_max - prev) <= tol * res.sigma_max) {
      res.converged = true;
      break;
    }
    prev = res.sigma_max;
  }
  return res;
}

BridgeCheck gs_bridge_check(const MixtureSpec& mix, double beta, const FreeEnergyEstimate& fe, const GsResult& gs,
                            double gs_negated, double audit_constant) {
  if (!(beta >= 1.0)) throw ContractViolation("gs_bridge_check needs beta >= 1");
  const double n = static_cast<double>(gs.argmax.coords.size());
  if (n == 0) throw ShapeError("ground-state result has no configuration");
  const double gs_site = gs.value / n;
  const double gs_bar = std::max(gs.value, gs_negated) / n;
  const double err = 3.0 * fe.std_error;

  BridgeCheck c;
  c.gap = gs_site - fe.value;
  c.bound = audit_constant / beta * std::log(2.0 + mix.max_order() * beta * std::max(0.0, gs_bar));
  c.lower_slack = gs_site + err - fe.value;
  c.upper_slack = c.bound + err - c.gap;
  c.lower_ok = c.lower_slack >= 0.0;
  c.upper_ok = c.upper_slack >= 0.0;
  return c;
}

BridgeCheck gs_bridge_check(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix, double beta,
                            const FreeEnergyEstimate& fe, const GsResult& gs, const GsSolverConfig& config,
                            std::uint64_t seed, double audit_constant) {
  std::vector<SymmetricTensor> negated;
  for (const auto& t : tensors) negated.push_back(-t);
  const auto neg = solve_gs(negated, mix, gs.argmax.domain, config, seed);
  return gs_bridge_check(mix, beta, fe, gs, neg.value, audit_constant);
}

}  // namespace pspin
