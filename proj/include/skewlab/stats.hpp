#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace skewlab {

double median(std::vector<double> v);
double mean(const std::vector<double>& v);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(const std::vector<double>& v);

// Asymptotic Kolmogorov critical value c(level) = sqrt(-log(level / 2) / 2)
// (level 0.01 gives 1.6276).
double kolmogorov_critical(double level);
double ks_critical_one_sample(double level, std::size_t n);
double ks_critical_two_sample(double level, std::size_t n, std::size_t m);

// sup |F_n - F|. With lattice_spacing h > 0 the sample is taken to live on a
// lattice and the jump at a point x is compared with F(x - h/2) .. F(x + h/2).
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf,
                     double lattice_spacing = 0.0);

// sup |F_n - G_m|, exact with ties.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Rounds x to the nearest point of {offset + k h}.
double snap_to_lattice(double x, double spacing, double offset);

double standard_normal_cdf(double x);

}  // namespace skewlab
