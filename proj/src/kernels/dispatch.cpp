#include <atomic>
#include <cstdlib>
#include <string>

#include "piafit/errors.hpp"
#include "piafit/kernels.hpp"

namespace piafit::kernels {

#ifndef PIAFIT_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(PIAFIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

namespace {

const KernelTable* initial_table() {
    if (const char* env = std::getenv("PIAFIT_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && cpu_supports(Isa::avx2)) return avx2_table();
    }
    if (cpu_supports(Isa::avx2)) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("kernel operand size mismatch: ") + what);
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

bool select(Isa isa) {
    if (!cpu_supports(isa)) return false;
    current().store(isa == Isa::avx2 ? avx2_table() : &scalar_table(), std::memory_order_release);
    return true;
}

std::string_view active_name() { return active().name; }

void gather(const CollocationMatrix& B, std::span<const double> x, std::span<double> out) {
    require(x.size() == B.cols() && out.size() == B.rows(), "gather");
    active().band_gather(band_view(B), x.data(), out.data());
}

void scatter_add(const CollocationMatrix& B, std::span<const double> y, std::span<double> out) {
    require(y.size() == B.rows() && out.size() == B.cols(), "scatter_add");
    active().band_scatter(band_view(B), y.data(), out.data());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "axpy");
    active().axpy(x.size(), a, x.data(), y.data());
}

void difference(std::span<const double> q, std::span<const double> z, std::span<double> r) {
    require(q.size() == z.size() && q.size() == r.size(), "difference");
    active().difference(q.size(), q.data(), z.data(), r.data());
}

void memory_update(double keep, std::span<double> lam, double corr, std::span<const double> g, double w,
                   std::span<const double> r) {
    require(lam.size() == g.size() && lam.size() == r.size(), "memory_update");
    active().memory_update(lam.size(), keep, lam.data(), corr, g.data(), w, r.data());
}

double sum_squares(std::span<const double> x) { return active().sum_squares(x.size(), x.data()); }

double max_abs(std::span<const double> x) { return active().max_abs(x.size(), x.data()); }

}  // namespace piafit::kernels
