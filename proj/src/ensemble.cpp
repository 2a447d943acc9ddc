#include "xychain/ensemble.hpp"

#include <cstdlib>
#include <string>

namespace xychain {

int default_worker_count() {
  if (const char* env = std::getenv("XYCHAIN_WORKERS")) {
    try {
      const int parsed = std::stoi(env);
      if (parsed >= 1) return parsed;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace xychain
