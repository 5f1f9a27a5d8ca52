#include "theo/suite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "theo/class_properties.hpp"
#include "theo/diagnostics.hpp"
#include "theo/theo_poula.hpp"

namespace theo {
namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double brute_force_w1(std::vector<double> a, const std::vector<double>& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = kInfinity;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

std::vector<SuiteCheck> run_property_suite(std::uint64_t seed) {
  std::vector<SuiteCheck> checks;
  RandomStream rng(derive_seed(seed, 0x5017eu));

  {
    std::size_t violations = 0, asym = 0;
    for (int i = 0; i < 100000; ++i) {
      const double lambda = std::pow(10.0, rng.uniform(-4.0, 0.0));
      const double eps = std::pow(10.0, rng.uniform(-3.0, 1.0));
      const double g = std::copysign(std::pow(10.0, rng.uniform(-12.0, 12.0)), rng.uniform() - 0.5);
      const double t = tamed_boosted_coord(g, lambda, eps);
      if (std::abs(t) > 1.0 / std::sqrt(lambda) + std::sqrt(lambda)) ++violations;
      if (tamed_boosted_coord(-g, lambda, eps) != -t) ++asym;
    }
    checks.push_back({"coordinate_bound", violations == 0,
                      std::to_string(violations) + " violations in 1e5 samples"});
    checks.push_back({"odd_symmetry", asym == 0, std::to_string(asym) + " asymmetric samples"});
  }

  {
    std::size_t violations = 0;
    for (int i = 0; i < 100000; ++i) {
      const double a = rng.uniform(-3.0, 3.0), b = rng.uniform(-3.0, 3.0);
      const double x = rng.uniform(-2.0, 2.0);
      const double lhs = std::abs(motivating_gradient(a, x) - motivating_gradient(b, x));
      const double rhs = 34.0 * std::pow(1.0 + std::abs(a) + std::abs(b), 28) * std::abs(a - b);
      if (lhs > rhs) ++violations;
    }
    checks.push_back({"motivating_lipschitz", violations == 0,
                      std::to_string(violations) + " violations in 1e5 triples"});
  }

  {
    double worst = 0.0;
    std::string where;
    for (const auto& problem : builtin_problems()) {
      for (int k = 0; k < 20; ++k) {
        ParamVector theta(problem->dimension());
        for (double& v : theta) v = rng.uniform(-problem->probe_radius(), problem->probe_radius());
        const auto r = finite_diff_check(*problem, theta, 1e-5, 100, rng.next_u64());
        if (r.max_relative_error > worst) {
          worst = r.max_relative_error;
          where = problem->name();
        }
      }
    }
    checks.push_back({"finite_difference", worst < 1e-5,
                      "max relative error " + fmt(worst) + (where.empty() ? "" : " (" + where + ")")});
  }

  {
    std::size_t mismatches = 0, order = 0, triangle = 0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 1 + rng.below(6);
      std::vector<double> a(n), b(n), c(n);
      for (std::size_t j = 0; j < n; ++j) {
        a[j] = rng.uniform(-5, 5);
        b[j] = rng.uniform(-5, 5);
        c[j] = rng.uniform(-5, 5);
      }
      const EmpiricalMeasure ma(a), mb(b), mc(c);
      const double w = w1_1d(ma, mb);
      if (std::abs(w - brute_force_w1(a, b)) > 1e-12 * (1.0 + w)) ++mismatches;
      if (w > w2_1d(ma, mb) * (1.0 + 1e-12)) ++order;
      if (w > (w1_1d(ma, mc) + w1_1d(mc, mb)) * (1.0 + 1e-12)) ++triangle;
    }
    checks.push_back({"wasserstein_brute_force", mismatches == 0,
                      std::to_string(mismatches) + " mismatches in 1e3 instances"});
    checks.push_back({"wasserstein_order", order == 0, std::to_string(order) + " violations"});
    checks.push_back({"wasserstein_triangle", triangle == 0, std::to_string(triangle) + " violations"});
  }

  {
    bool monotone = true;
    for (int ri = 0; ri < 5; ++ri)
      for (int ei = 0; ei < 10; ++ei) {
        const double eta = 0.05 + 0.09 * ei;
        const double here = lambda_max(eta, ri);
        if (ei > 0 && !(here < lambda_max(eta - 0.09, ri))) monotone = false;
        if (ri > 0 && !(here < lambda_max(eta, ri - 1))) monotone = false;
      }
    const double v = lambda_max(0.5, 1);
    checks.push_back({"lambda_max", monotone && exact_binomial(24, 12) == "2704156",
                      "lambda_max(0.5, 1) = " + fmt(v)});
  }

  {
    const auto oracle = GibbsOracle1D::build([](double z) { return 0.5 * z * z; }, 1.0, -8.0, 8.0);
    const double var = oracle.variance();
    const double m3 = oracle.moment(3), m4 = oracle.moment(4);
    const bool ok = std::abs(var - 1.0) < 1e-4 && std::abs(oracle.mean()) < 1e-4 &&
                    std::abs(m3) < 1e-4 && std::abs(m4 - 3.0) < 1e-4;
    checks.push_back({"gibbs_gaussian_moments", ok,
                      "variance " + fmt(var) + ", fourth moment " + fmt(m4)});
  }

  {
    MotivatingProblem problem;
    std::vector<ParamVector> thetas;
    for (double t : {-100.0, -10.0, -3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0, 10.0, 100.0})
      thetas.push_back({t});
    ProbeSpec spec = probe_for(problem, thetas, {0.1, 0.01, 0.001});
    spec.seed = seed;
    const auto report = check_class_properties(
        theo_poula_map(problem, 0.1),
        [&problem](std::span<const double> th, const Sample& x) {
          return problem.stochastic_gradient(th, x);
        },
        spec);
    double worst_k = 0.0;
    for (const auto& f : report.fits)
      worst_k = std::max(worst_k, f.k_lambda / (1.0 / std::sqrt(f.lambda) + std::sqrt(f.lambda)));
    checks.push_back({"class_properties", report.liminf_pass && worst_k <= 1.0,
                      std::string(report.label) + "; property-3 estimate at |theta|=" +
                          fmt(report.largest_theta_norm) + " is " +
                          fmt(report.fits.front().liminf_estimate)});
  }
  return checks;
}

nlohmann::json suite_to_json(const std::vector<SuiteCheck>& checks) {
  nlohmann::json out = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  return {{"checks", out}, {"all_passed", all}};
}

}  // namespace theo
