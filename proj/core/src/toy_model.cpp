#include "cdforest/toy_model.hpp"

#include <cmath>
#include <stdexcept>

#include "cdforest/normal.hpp"

namespace cdforest {

void ToyModelConfig::check() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("toy model: ") + name +
                                        " must be a positive finite number");
        }
    };
    positive(gpd_scale, "gpd_scale");
    positive(gpd_shape, "gpd_shape");
    positive(lognormal_sigma, "lognormal_sigma");
    positive(gamma_shape, "gamma_shape");
    positive(gamma_scale, "gamma_scale");
    positive(noise_sigma, "noise_sigma");
    if (!std::isfinite(lognormal_mu)) {
        throw std::invalid_argument("toy model: lognormal_mu must be finite");
    }
    if (gamma_shape < 1.0) {
        throw std::invalid_argument(
            "toy model: gamma_shape below 1 is outside the sampler's validity range");
    }
}

double gpd_quantile(double u, double scale, double shape) {
    return scale / shape * (std::pow(1.0 - u, -shape) - 1.0);
}

double gamma_draw(Rng& rng, NormalSampler& normal, double shape, double scale) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = normal(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_double();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

ToyModelSampler::ToyModelSampler(const ToyModelConfig& cfg)
    : ToyModelSampler(cfg, cfg.seed) {}

ToyModelSampler::ToyModelSampler(const ToyModelConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed) {
    cfg_.check();
}

std::array<double, 3> ToyModelSampler::covariates() {
    const double x1 = gpd_quantile(rng_.next_double(), cfg_.gpd_scale, cfg_.gpd_shape);
    const double x2 = std::exp(cfg_.lognormal_mu + cfg_.lognormal_sigma * normal_(rng_));
    const double x3 = gamma_draw(rng_, normal_, cfg_.gamma_shape, cfg_.gamma_scale);
    return {x1, x2, x3};
}

std::pair<std::array<double, 3>, double> ToyModelSampler::row() {
    const std::array<double, 3> x = covariates();
    const double y = x[0] + x[1] + x[2] + cfg_.noise_sigma * normal_(rng_);
    return {x, y};
}

Dataset sample_toy(const ToyModelConfig& cfg, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sample_toy: n must be >= 1");
    ToyModelSampler sampler(cfg);
    std::vector<double> features;
    features.reserve(n * 3);
    std::vector<double> responses;
    responses.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = sampler.row();
        features.insert(features.end(), x.begin(), x.end());
        responses.push_back(y);
    }
    return Dataset(std::move(features), std::move(responses), 3);
}

double true_cdf(std::span<const double> x, double y, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("true_cdf: sigma must be positive");
    double center = 0.0;
    for (const double xi : x) center += xi;
    return normal_cdf((y - center) / sigma);
}

double true_quantile(std::span<const double> x, double alpha, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("true_quantile: sigma must be positive");
    }
    double center = 0.0;
    for (const double xi : x) center += xi;
    return center + sigma * normal_quantile(alpha);
}

}  // namespace cdforest
