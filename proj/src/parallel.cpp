#include "isospec/parallel.hpp"

#include <cstdlib>
#include <string>

namespace isospec {

int default_thread_count() {
    if (const char* env = std::getenv("ISOSPEC_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace isospec
