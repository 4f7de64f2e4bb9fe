#include "obstacle/parallel.hpp"

#include <cstdlib>
#include <string>

namespace obstacle {

int default_thread_count() {
  const char* env = std::getenv("OBSTACLE_FEM_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    int n = std::stoi(env);
    return n >= 1 ? n : 1;
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace obstacle
