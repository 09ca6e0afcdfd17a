#pragma once

#include <cstddef>

namespace avdelay {

// Execution policy for the data-parallel kernels. `Serial` is the reference
// path; `Parallel` runs the same per-item work under OpenMP and reduces in
// item order, so both produce bit-identical results.
enum class Exec { Serial, Parallel };

int max_threads();

// Sets the OpenMP thread count used by Parallel kernels (0 keeps the default).
void set_threads(int n);

}  // namespace avdelay
