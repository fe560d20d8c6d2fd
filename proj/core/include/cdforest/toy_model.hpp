#ifndef CDFOREST_TOY_MODEL_HPP
#define CDFOREST_TOY_MODEL_HPP

#include <array>
#include <cstdint>
#include <span>

#include "cdforest/dataset.hpp"
#include "cdforest/rng.hpp"

namespace cdforest {

// Additive toy model Y = X1 + X2 + X3 + eps with
//   X1 ~ generalized Pareto (scale, shape), location 0
//   X2 ~ lognormal (log-mean, log-sd)
//   X3 ~ gamma (shape, scale)
//   eps ~ Normal(0, noise_sigma^2)
// The conditional law of Y given X = x is Normal(x1+x2+x3, noise_sigma^2),
// which makes the conditional CDF and quantiles available in closed form.
struct ToyModelConfig {
    double gpd_scale = 1.5;
    double gpd_shape = 0.25;
    double lognormal_mu = 1.1;
    double lognormal_sigma = 0.6;
    double gamma_shape = 2.0;
    double gamma_scale = 0.6;
    double noise_sigma = 2.0;
    std::uint64_t seed = 0;

    static constexpr std::size_t dimension = 3;

    void check() const;  // throws std::invalid_argument on a bad parameter
};

// Generalized Pareto quantile function (inverse transform):
// (scale/shape) * ((1-u)^(-shape) - 1) for u in [0, 1).
double gpd_quantile(double u, double scale, double shape);

// Gamma variate by the Marsaglia-Tsang squeeze method (shape >= 1).
double gamma_draw(Rng& rng, NormalSampler& normal, double shape, double scale);

// Draws the covariate vector (X1, X2, X3) and the full row i.i.d. from
// the model, one deterministic stream per sampler instance.
class ToyModelSampler {
public:
    explicit ToyModelSampler(const ToyModelConfig& cfg);
    ToyModelSampler(const ToyModelConfig& cfg, std::uint64_t seed);

    std::array<double, 3> covariates();
    // (x, y) with y = x1 + x2 + x3 + noise
    std::pair<std::array<double, 3>, double> row();

private:
    ToyModelConfig cfg_;
    Rng rng_;
    NormalSampler normal_;
};

// n i.i.d. rows of the toy model; deterministic for a given cfg.seed.
Dataset sample_toy(const ToyModelConfig& cfg, std::size_t n);

// Conditional distribution function F(y | x) = Phi((y - (x1+x2+x3)) / sigma).
double true_cdf(std::span<const double> x, double y, double sigma);

// Conditional quantile q_alpha(Y | x) = x1 + x2 + x3 + sigma * z_alpha.
double true_quantile(std::span<const double> x, double alpha, double sigma);

}  // namespace cdforest

#endif  // CDFOREST_TOY_MODEL_HPP
