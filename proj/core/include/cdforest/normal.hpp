#ifndef CDFOREST_NORMAL_HPP
#define CDFOREST_NORMAL_HPP

namespace cdforest {

// Standard normal distribution function, density and quantile. cdf and
// pdf are accurate to double precision via erfc; the quantile uses
// Acklam's rational approximation polished with one Halley step, giving
// absolute error well below 1e-9 across (0, 1).
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

}  // namespace cdforest

#endif  // CDFOREST_NORMAL_HPP
