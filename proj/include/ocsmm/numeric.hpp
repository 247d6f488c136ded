#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace ocsmm {

/// Raised when a computation is well-posed but fails numerically
/// (non-PSD Gram beyond jitter, singular covariance, negative RKHS distance).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Pairwise (tree) summation. The split points depend only on the length,
/// so the result is identical for any caller-side blocking.
double pairwise_sum(std::span<const double> values);

/// Worker count: OCSMM_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) over a static partition of thread_count()
/// workers. Each index must write only its own outputs; results are then
/// independent of the schedule. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace ocsmm
