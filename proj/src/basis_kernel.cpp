// Built with -ffast-math so the loop vectorises against libmvec; keep anything that
// tests for inf/nan out of this file.
#include "basis_kernel.hpp"

#include <cmath>

namespace lppl::detail {

__attribute__((target_clones("avx2", "default")))
void lppl_basis(const double* t, std::size_t n, double tc, double m, double omega, double phi, double* f,
                double* g) {
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(tc - t[i]);
        const double xm = std::exp(m * lx);
        f[i] = xm;
        g[i] = xm * std::cos(omega * lx + phi);
    }
}

}  // namespace lppl::detail
