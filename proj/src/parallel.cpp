#include "eds/parallel.hpp"

#include <omp.h>

namespace eds {

int available_threads() noexcept { return omp_get_max_threads(); }

}  // namespace eds
