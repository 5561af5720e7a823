#pragma once

// Data-parallel inner loops of the energy assembly and the quasi-Newton
// solver. Every kernel has a scalar reference implementation; wider variants
// are chosen at runtime from what the CPU reports. They perform the same
// operations in the same order as the reference, so results are bitwise equal
// (this relies on -ffp-contract=off).
//
// The active level can be pinned with RUBBERNET_SIMD=scalar|avx2 or
// set_level(); the choice is process-wide.

#include <cstddef>
#include <span>
#include <string_view>

namespace rubbernet::simd {

enum class Level { scalar, avx2 };

struct Kernels {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // r[k] = |pos[first[k]] - pos[second[k]]| * inv_rest[k]; pos is flat with
    // `dim` doubles per vertex.
    void (*edge_stretch)(int dim, const double* pos, const int* first, const int* second,
                         const double* inv_rest, std::size_t n, double* r);
    // energy[k] = K r^2, dwdr[k] = 2 K r
    void (*quadratic_pair)(const double* r, double stiffness, std::size_t n, double* energy,
                           double* dwdr);
    // x[k] = inverse Langevin series at rho[k], dx[k] its derivative
    void (*inv_langevin_series)(const double* rho, std::size_t n, double* x, double* dx);
};

const Kernels& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
#endif

bool level_available(Level level);
/// Best level the CPU supports.
Level detected_level();
Level active_level();
/// Throws std::invalid_argument if the level is unavailable on this CPU.
void set_level(Level level);
const Kernels& kernels(Level level);
const Kernels& active();

std::string_view level_name(Level level);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}

}  // namespace rubbernet::simd
