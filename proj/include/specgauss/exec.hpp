#pragma once

namespace specgauss {

/// Kernel execution policy. Serial variants are the reference
/// implementations; parallel variants must reproduce them bit for bit.
enum class Exec { Serial, Parallel };

/// Caps OpenMP parallelism; n <= 0 leaves the runtime default.
void set_thread_limit(int n);
int thread_limit();

}  // namespace specgauss
