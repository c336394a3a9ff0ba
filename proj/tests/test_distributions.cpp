#include <doctest.h>

#include <cmath>
#include <random>

#include "htsrec/distributions.hpp"
#include "htsrec/errors.hpp"
#include "htsrec/special_math.hpp"
#include "oracles.hpp"

using namespace htsrec;

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[n - 1 - i] = weights[i];
  }
}

struct Grid1D {
  std::vector<double> points;
  std::vector<double> weights;
};

Grid1D piecewise_grid(const std::vector<double>& breaks, int nodes_per_panel) {
  Grid1D grid;
  std::vector<double> x, w;
  gauss_legendre(nodes_per_panel, x, w);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    for (int i = 0; i < nodes_per_panel; ++i) {
      grid.points.push_back(0.5 * (a + b) + 0.5 * (b - a) * x[i]);
      grid.weights.push_back(0.5 * (b - a) * w[i]);
    }
  }
  return grid;
}

}  // namespace

TEST_CASE("mvt log density: limits and closed forms") {
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  MultivariateT near_gaussian{zero1, Eigen::MatrixXd::Identity(1, 1), 1e6};
  CHECK(mvt_logpdf(near_gaussian, zero1) ==
        doctest::Approx(-0.5 * std::log(2.0 * 3.14159265358979)).epsilon(1e-4));

  MultivariateT cauchy{zero1, Eigen::MatrixXd::Identity(1, 1), 1.0};
  CHECK(mvt_logpdf(cauchy, zero1) ==
        doctest::Approx(-std::log(3.141592653589793)).epsilon(1e-12));
}

TEST_CASE("mvt density integrates to one") {
  std::mt19937_64 gen(11);
  MultivariateT d{oracles::random_vector(gen, 3), oracles::random_spd(gen, 3), 6.0};
  const Eigen::LLT<Eigen::MatrixXd> llt(d.scale);
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det_l = std::log(l.diagonal().prod());

  const Grid1D grid = piecewise_grid({-35.0, -6.0, 6.0, 35.0}, 28);
  const std::size_t g = grid.points.size();
  double integral = 0.0;
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = 0; b < g; ++b) {
      double inner = 0.0;
      for (std::size_t c = 0; c < g; ++c) {
        Eigen::Vector3d u(grid.points[a], grid.points[b], grid.points[c]);
        const Eigen::VectorXd x = d.loc + l * u;
        inner += grid.weights[c] * std::exp(mvt_logpdf(d, x) + log_det_l);
      }
      integral += grid.weights[a] * grid.weights[b] * inner;
    }
  }
  // Remaining tail mass for df=6 beyond radius 35 is far below the tolerance.
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("mvt log density is permutation invariant") {
  std::mt19937_64 gen(21);
  MultivariateT d{oracles::random_vector(gen, 4), oracles::random_spd(gen, 4), 7.5};
  const Eigen::VectorXd x = oracles::random_vector(gen, 4);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
  perm.setIdentity();
  std::shuffle(perm.indices().data(), perm.indices().data() + 4, gen);
  MultivariateT permuted{perm * d.loc,
                         perm * d.scale * perm.transpose(), d.df};
  CHECK(mvt_logpdf(permuted, perm * x) ==
        doctest::Approx(mvt_logpdf(d, x)).epsilon(1e-12));
}

TEST_CASE("mvt converges pointwise to the gaussian as df grows") {
  std::mt19937_64 gen(33);
  const Eigen::VectorXd loc = oracles::random_vector(gen, 3);
  const Eigen::MatrixXd scale = oracles::random_spd(gen, 3);
  MultivariateT t_dist{loc, scale, 1e6};
  MultivariateGaussian g_dist{loc, scale};
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = loc + oracles::random_vector(gen, 3);
    CHECK(mvt_logpdf(t_dist, x) ==
          doctest::Approx(mvn_logpdf(g_dist, x)).epsilon(1e-4));
  }
}

TEST_CASE("marginals pick a coordinate without touching df") {
  Eigen::VectorXd loc(2);
  loc << 1, 2;
  MultivariateT d{loc, Eigen::MatrixXd::Identity(2, 2), 5.0};
  const UnivariateForecast m = marginal(d, 1);
  CHECK(m.kind == MarginKind::student_t);
  CHECK(m.loc == 2.0);
  CHECK(m.scale == 1.0);
  CHECK(m.df == 5.0);

  MultivariateGaussian g{loc, 4.0 * Eigen::MatrixXd::Identity(2, 2)};
  const UnivariateForecast mg = marginal(g, 0);
  CHECK(mg.kind == MarginKind::gaussian);
  CHECK(mg.scale == 2.0);
}

TEST_CASE("sampled coordinate matches its marginal CDF (KS)") {
  std::mt19937_64 gen(55);
  MultivariateT d{oracles::random_vector(gen, 2), oracles::random_spd(gen, 2), 8.0};
  const int k = 100000;
  const Eigen::MatrixXd draws = sample(d, k, 2024);
  std::vector<double> xs(draws.col(1).data(), draws.col(1).data() + k);
  std::sort(xs.begin(), xs.end());
  const UnivariateForecast m = marginal(d, 1);
  double ks = 0.0;
  for (int i = 0; i < k; ++i) {
    const double f = cdf(m, xs[i]);
    ks = std::max(ks, std::abs(f - (i + 1.0) / k));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / k));
  }
  CHECK(ks < 0.02);
}

TEST_CASE("prediction intervals") {
  const UnivariateForecast standard{MarginKind::gaussian, 0.0, 1.0, 0.0};
  const auto [lo, hi] = prediction_interval(standard, 0.95);
  CHECK(lo == doctest::Approx(-1.959963984540054).epsilon(1e-9));
  CHECK(hi == doctest::Approx(1.959963984540054).epsilon(1e-9));

  const UnivariateForecast wide_df{MarginKind::student_t, 0.0, 1.0, 1e5};
  CHECK(interval_width(wide_df, 0.95) ==
        doctest::Approx(interval_width(standard, 0.95)).epsilon(1e-3));

  for (double df : {3.0, 7.0, 25.0, 80.0}) {
    const UnivariateForecast t{MarginKind::student_t, 0.0, 1.0, df};
    CHECK(interval_width(t, 0.95) > interval_width(standard, 0.95));
  }

  CHECK_THROWS_AS(prediction_interval(standard, 0.0), Error);
  CHECK_THROWS_AS(prediction_interval(standard, 1.0), Error);
}

TEST_CASE("closed-form CRPS matches quadrature of the definition") {
  const UnivariateForecast standard{MarginKind::gaussian, 0.0, 1.0, 0.0};
  const double expected_at_zero =
      std::sqrt(2.0 / 3.141592653589793) - 1.0 / std::sqrt(3.141592653589793);
  CHECK(crps(standard, 0.0) == doctest::Approx(expected_at_zero).epsilon(1e-12));
  CHECK(crps(standard, 0.0) ==
        doctest::Approx(oracles::crps_quadrature(standard, 0.0)).epsilon(1e-6));

  const UnivariateForecast t5{MarginKind::student_t, 0.0, 1.0, 5.0};
  CHECK(crps(t5, 0.0) ==
        doctest::Approx(oracles::crps_quadrature(t5, 0.0)).epsilon(1e-6));

  SUBCASE("linear scaling") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unif(0.2, 4.0);
    for (int rep = 0; rep < 20; ++rep) {
      const double sigma = unif(gen);
      const double y = unif(gen) - 2.0;
      const UnivariateForecast scaled{MarginKind::gaussian, 0.0, sigma, 0.0};
      CHECK(crps(scaled, sigma * y) ==
            doctest::Approx(sigma * crps(standard, y)).epsilon(1e-12));
    }
  }

  SUBCASE("non-negative everywhere") {
    for (double y : {-4.0, -1.0, 0.0, 0.5, 3.0}) {
      CHECK(crps(standard, y) > 0.0);
      CHECK(crps(t5, y) > 0.0);
    }
  }
}

TEST_CASE("sampling moments and determinism") {
  std::mt19937_64 gen(4);

  SUBCASE("gaussian mean by CLT bound") {
    const Eigen::VectorXd mean = oracles::random_vector(gen, 3);
    MultivariateGaussian d{mean, Eigen::MatrixXd::Identity(3, 3)};
    const int k = 100000;
    const Eigen::MatrixXd draws = sample(d, k, 99);
    const Eigen::VectorXd sample_mean = draws.colwise().mean();
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(sample_mean(j) - mean(j)) < 4.0 / std::sqrt(double(k)));
  }

  SUBCASE("t covariance is scale * df/(df-2)") {
    MultivariateT d{Eigen::VectorXd::Zero(2), oracles::random_spd(gen, 2), 5.0};
    const int k = 1000000;
    const Eigen::MatrixXd draws = sample(d, k, 123);
    const Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(k - 1);
    const Eigen::MatrixXd expected = d.covariance();
    CHECK((cov - expected).cwiseAbs().maxCoeff() / expected.cwiseAbs().maxCoeff() <
          0.05);
  }

  SUBCASE("fixed seed replays bitwise") {
    MultivariateT d{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 4.0};
    const Eigen::MatrixXd a = sample(d, 64, 7);
    const Eigen::MatrixXd b = sample(d, 64, 7);
    CHECK(a == b);
  }
}
