#pragma once

// Execution policy for the data-parallel kernels.
//
// Every kernel is written as a per-index body that owns its output slot and
// reduces in a fixed order, so the serial and OpenMP paths produce bitwise
// identical results. The serial path is the reference the tests compare
// against; bench/ times the two against each other.

#include <omp.h>

namespace gdegan {

enum class Exec { Serial, Parallel };

template <class Body>
void for_each_index(int n, Exec exec, Body&& body) {
  if (exec == Exec::Parallel && n > 1) {
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
}

}  // namespace gdegan
