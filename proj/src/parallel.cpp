#include "pe/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pe {

std::size_t default_workers() {
    if (const char* env = std::getenv("PE_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max<std::size_t>(std::thread::hardware_concurrency(), 1);
}

}  // namespace pe
