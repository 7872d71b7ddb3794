#include "kinetic/parallel.hpp"

#include <cstdlib>
#include <string>

namespace kinetic {

unsigned default_threads() {
  if (const char* env = std::getenv("KINETIC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace kinetic
