#include "textrl/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace textrl::kernels {

#if TEXTRL_HAVE_AVX2
const Backend* avx2_impl();
#endif

const Backend* avx2() {
#if TEXTRL_HAVE_AVX2
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_impl();
#endif
    return nullptr;
}

namespace {

std::vector<const Backend*> list_available() {
    std::vector<const Backend*> out{&scalar()};
    if (const Backend* v = avx2()) out.push_back(v);
    return out;
}

const Backend& select_active() {
    if (const char* env = std::getenv("TEXTRL_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return scalar();
        if (want == "avx2") {
            if (const Backend* v = avx2()) return *v;
            throw std::runtime_error("TEXTRL_KERNELS=avx2 but AVX2 is unavailable");
        }
        if (want != "auto")
            throw std::runtime_error("unknown TEXTRL_KERNELS value: " + want);
    }
    if (const Backend* v = avx2()) return *v;
    return scalar();
}

} // namespace

const Backend& active() {
    static const Backend& chosen = select_active();
    return chosen;
}

std::size_t available_count() {
    static const auto all = list_available();
    return all.size();
}

const Backend& available(std::size_t i) {
    static const auto all = list_available();
    return *all.at(i);
}

} // namespace textrl::kernels
