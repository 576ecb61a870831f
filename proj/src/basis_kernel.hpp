#pragma once

#include <cstddef>

namespace lppl::detail {

/// f_i = x_i^m and g_i = x_i^m cos(omega ln x_i + phi) with x_i = tc - t_i.
/// Caller guarantees tc > t_i for every i.
void lppl_basis(const double* t, std::size_t n, double tc, double m, double omega, double phi, double* f,
                double* g);

}  // namespace lppl::detail
