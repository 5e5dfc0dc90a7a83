#pragma once

// Special-function helpers shared by the severity and bound code.

namespace eltbound::special {

// log of the lower incomplete gamma function, log(int_0^z x^(a-1) e^(-x) dx).
// Stays finite where gamma(a, z) itself would overflow or underflow.
double log_lower_gamma(double a, double z);

// log of int_0^u x^(a-1) e^(c x) dx for c >= 0, a > 0, u > 0.
double log_growing_gamma_integral(double a, double c, double u);

double log_sum_exp(double a, double b);

}  // namespace eltbound::special
