#include "rubbernet/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rubbernet::simd {

namespace {

Level initial_level() {
    const char* env = std::getenv("RUBBERNET_SIMD");
    if (env != nullptr) {
        const std::string want(env);
        if (want == "scalar") {
            return Level::scalar;
        }
        if (want == "avx2" && level_available(Level::avx2)) {
            return Level::avx2;
        }
    }
    return detected_level();
}

std::atomic<Level>& current() {
    static std::atomic<Level> level{initial_level()};
    return level;
}

}  // namespace

bool level_available(Level level) {
    switch (level) {
    case Level::scalar:
        return true;
    case Level::avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2") != 0;
#else
        return false;
#endif
    }
    return false;
}

Level detected_level() { return level_available(Level::avx2) ? Level::avx2 : Level::scalar; }

Level active_level() { return current().load(std::memory_order_relaxed); }

void set_level(Level level) {
    if (!level_available(level)) {
        throw std::invalid_argument("SIMD level " + std::string(level_name(level)) +
                                    " is not supported by this CPU");
    }
    current().store(level, std::memory_order_relaxed);
}

const Kernels& kernels(Level level) {
#if defined(__x86_64__) || defined(_M_X64)
    if (level == Level::avx2) {
        return avx2_kernels();
    }
#endif
    (void)level;
    return scalar_kernels();
}

const Kernels& active() { return kernels(active_level()); }

std::string_view level_name(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

}  // namespace rubbernet::simd
