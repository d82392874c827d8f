#include "ehrlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ehrlab {

void apply_thread_env() {
  const char* v = std::getenv("EHRLAB_THREADS");
  if (v == nullptr) return;
  try {
    const int n = std::stoi(v);
    if (n > 0) set_threads(n);
  } catch (const std::exception&) {
    // ignore malformed values; the OpenMP default stays in effect
  }
}

}  // namespace ehrlab
