#include "sphr/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace sphr {

namespace {

int detect_worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SPHR_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) n = std::min(n, cap);
        } catch (...) {
            // Unparseable value: keep the detected count.
        }
    }
    return n;
}

} // namespace

int worker_count() {
    static const int count = detect_worker_count();
    return count;
}

} // namespace sphr
