#pragma once

namespace htsrec {

double norm_pdf(double z);
double norm_cdf(double z);

/// Inverse standard normal CDF (Wichura's AS 241, full double precision).
double norm_quantile(double p);

double log_beta(double a, double b);

/// Regularized incomplete beta function I_x(a, b).
double inc_beta(double a, double b, double x);

/// Inverse of I_x(a, b) in x for fixed (a, b).
double inc_beta_inv(double a, double b, double p);

double student_t_logpdf(double t, double df);
double student_t_pdf(double t, double df);
double student_t_cdf(double t, double df);

/// Quantile of the standard Student-t via the incomplete-beta inverse,
/// polished by one Newton step on the CDF; |error| < 1e-10 over tested df.
double student_t_quantile(double p, double df);

}  // namespace htsrec
