#include "hhepi/parallel.hpp"

#include <cstdlib>
#include <string>

namespace hhepi {

unsigned resolve_threads(unsigned requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("HHE_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) {
                return static_cast<unsigned>(value);
            }
        } catch (const std::exception&) {
            // fall through to the hardware default
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

}  // namespace hhepi
