#pragma once

namespace ufls {

// Standard normal helpers, stable far into the lower tail (|x| ~ 300).
double norm_pdf(double x);
double norm_cdf(double x);
double log_norm_cdf(double x);
// Inverse Mills ratio pdf(x)/cdf(x).
double inv_mills(double x);

} // namespace ufls
