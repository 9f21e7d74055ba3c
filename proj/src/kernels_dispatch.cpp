#include <atomic>
#include <cstdlib>
#include <cstring>

#include "spinspec/errors.hpp"
#include "spinspec/kernels.hpp"

namespace spinspec::kernels {

namespace {

bool probe_cpu_avx2() {
#if defined(SPINSPEC_HAVE_AVX2) && defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Backend> g_requested{Backend::Auto};

Backend resolve(Backend requested) {
    if (requested == Backend::Auto) {
        if (const char* env = std::getenv("SPINSPEC_KERNEL")) {
            if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
            if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
        }
        return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
    }
    return requested;
}

}  // namespace

bool cpu_has_avx2() {
    static const bool supported = probe_cpu_avx2();
    return supported;
}

void set_backend(Backend backend) {
    if (backend == Backend::Avx2 && !cpu_has_avx2())
        throw UsageError("avx2 kernels are not available on this build/CPU");
    g_requested.store(backend);
}

Backend active_backend() { return resolve(g_requested.load()); }

void psd_grid(const BudgetFactors& f, const double* omega, double* out, std::size_t n) {
#ifdef SPINSPEC_HAVE_AVX2
    if (active_backend() == Backend::Avx2) {
        psd_grid_avx2(f, omega, out, n);
        return;
    }
#endif
    psd_grid_scalar(f, omega, out, n);
}

void mors_grid(const MorsFactors& f, const double* omega, double* out, std::size_t n) {
#ifdef SPINSPEC_HAVE_AVX2
    if (active_backend() == Backend::Avx2) {
        mors_grid_avx2(f, omega, out, n);
        return;
    }
#endif
    mors_grid_scalar(f, omega, out, n);
}

}  // namespace spinspec::kernels
