#pragma once

// Inner-loop arithmetic of the fitting iterations. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant. The active
// table is chosen once at startup from CPU features; PIAFIT_KERNELS=scalar
// or PIAFIT_KERNELS=avx2 in the environment overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

#include "piafit/splines.hpp"

namespace piafit::kernels {

/// Raw view of a banded collocation matrix.
struct BandView {
    std::size_t rows;
    std::size_t width;
    const std::size_t* first;
    const double* values;
};

inline BandView band_view(const CollocationMatrix& B) {
    return {B.rows(), B.width(), B.firsts().data(), B.values().data()};
}

struct KernelTable {
    const char* name;
    /// out[j] = sum_k v[j,k] x[first_j + k]            (out = B x)
    void (*band_gather)(const BandView& B, const double* x, double* out);
    /// out[first_j + k] += v[j,k] y[j]                 (out += B^T y)
    void (*band_scatter)(const BandView& B, const double* y, double* out);
    /// y += a x
    void (*axpy)(std::size_t n, double a, const double* x, double* y);
    /// r = q - z
    void (*difference)(std::size_t n, const double* q, const double* z, double* r);
    /// lam = keep*lam + corr*g + w*r
    void (*memory_update)(std::size_t n, double keep, double* lam, double corr, const double* g, double w,
                          const double* r);
    /// sum_i x_i^2
    double (*sum_squares)(std::size_t n, const double* x);
    /// max_i |x_i|
    double (*max_abs)(std::size_t n, const double* x);
};

enum class Isa { scalar, avx2 };

const KernelTable& scalar_table();
/// nullptr when not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);

/// Table currently used by the library.
const KernelTable& active();
/// Switch the active table; returns false (and changes nothing) when the
/// ISA is unavailable on this build or CPU.
bool select(Isa isa);
std::string_view active_name();

// Span wrappers over the active table.
void gather(const CollocationMatrix& B, std::span<const double> x, std::span<double> out);
void scatter_add(const CollocationMatrix& B, std::span<const double> y, std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
void difference(std::span<const double> q, std::span<const double> z, std::span<double> r);
void memory_update(double keep, std::span<double> lam, double corr, std::span<const double> g, double w,
                   std::span<const double> r);
double sum_squares(std::span<const double> x);
double max_abs(std::span<const double> x);

}  // namespace piafit::kernels
