#pragma once

namespace evt::par {

/// Caps the number of OpenMP threads used by the parallel kernels.
/// n <= 1 selects the serial code paths. Default is the OpenMP runtime
/// maximum (1 when built without OpenMP).
void set_max_threads(int n);

int max_threads();

/// True when the parallel code paths are active (OpenMP available and
/// more than one thread requested).
bool enabled();

}  // namespace evt::par
