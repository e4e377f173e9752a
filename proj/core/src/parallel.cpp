#include "mwcalib/parallel.hpp"

namespace mwcalib {

int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace mwcalib
