#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace hvrfif {

inline constexpr const char* kVersion = "1.0.0";

/// Worker count: hardware concurrency capped by HVRFIF_THREADS (>=1).
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("HVRFIF_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

/// Runs fn(begin, end) over contiguous chunks of [0, count) on worker threads.
/// fn must write to disjoint state per chunk; results are merged by the caller.
template <typename Fn>
void parallel_chunks(std::size_t count, Fn&& fn) {
    unsigned workers = worker_count();
    if (count == 0) return;
    if (workers <= 1 || count < 4096) {
        fn(std::size_t{0}, count);
        return;
    }
    workers = std::min<unsigned>(workers, static_cast<unsigned>((count + 4095) / 4096));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t b = w * chunk;
        std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

/// FNV-1a over raw bytes; used to fingerprint config documents in reports.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

/// Fixed 17-significant-digit form (round-trip exact for doubles).
inline std::string format_double17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace hvrfif
